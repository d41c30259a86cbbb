//! Hybrid functions, pseudo-functions and their joins.
//!
//! A [`HybridTerm`] is the unevaluated pairing `f^A` of a value word with a
//! symbolic region. Terms are combined by a plain join or by a join marked
//! with an associative-commutative [`StarOp`]. Nothing is evaluated until a
//! point and a valuation are supplied; see [`eval`].

mod eval;
mod scalar;
mod star;

use std::collections::BTreeMap;
use std::fmt;

pub use eval::{eval, graph, is_reducible, pseudo_graph, term_graph_value, EvalOutcome, Value};
pub use scalar::ScalarExpr;
pub use star::StarOp;

use crate::error::{HybridError, Result};
use crate::point::{Point, Rational};
use crate::regions::{is_ident, RegionTable, SymbolicHybridSet, Valuation};
use crate::zmodule::HybridSet;

const WORD_SPACE: &str = "function-atoms";

/// A named function, optionally with a scalar body in `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionAtom {
    pub name: String,
    pub body: Option<ScalarExpr>,
}

impl FunctionAtom {
    pub fn opaque(name: impl Into<String>) -> Self {
        FunctionAtom {
            name: name.into(),
            body: None,
        }
    }

    pub fn with_body(name: impl Into<String>, body: ScalarExpr) -> Self {
        FunctionAtom {
            name: name.into(),
            body: Some(body),
        }
    }

    pub fn constant(name: impl Into<String>, c: Rational) -> Self {
        FunctionAtom::with_body(name, ScalarExpr::Const(c))
    }

    /// Value at the point. The body sees the first coordinate as `x`.
    pub fn value_at(&self, p: &Point, v: &Valuation) -> Result<AtomValue> {
        let Some(body) = &self.body else {
            return Ok(AtomValue::Opaque);
        };
        let x = p.coords().first().ok_or_else(|| HybridError::DimensionMismatch {
            expected: "a point with at least one coordinate".into(),
            found: "an empty point".into(),
        })?;
        Ok(match body.eval(x, v)? {
            Some(r) => AtomValue::Scalar(r),
            None => AtomValue::Undefined,
        })
    }
}

/// What a function atom yields at a point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomValue {
    Scalar(Rational),
    /// The body is undefined here (e.g. division by zero).
    Undefined,
    /// No body: the atom only takes part formally.
    Opaque,
}

/// Registry of function atoms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AtomTable {
    atoms: BTreeMap<String, FunctionAtom>,
}

impl AtomTable {
    pub fn new() -> Self {
        AtomTable::default()
    }

    pub fn insert(&mut self, atom: FunctionAtom) -> Result<()> {
        if self.atoms.contains_key(&atom.name) {
            return Err(HybridError::Contract(format!(
                "duplicate function atom `{}`",
                atom.name
            )));
        }
        self.atoms.insert(atom.name.clone(), atom);
        Ok(())
    }

    /// Inserts `atom`, or accepts it if an identical atom is present.
    pub fn ensure(&mut self, atom: FunctionAtom) -> Result<()> {
        match self.atoms.get(&atom.name) {
            Some(existing) if *existing == atom => Ok(()),
            Some(_) => Err(HybridError::Contract(format!(
                "function atom `{}` is already declared differently",
                atom.name
            ))),
            None => self.insert(atom),
        }
    }

    pub fn with(mut self, atom: FunctionAtom) -> Self {
        self.atoms.insert(atom.name.clone(), atom);
        self
    }

    pub fn get(&self, name: &str) -> Result<&FunctionAtom> {
        self.atoms
            .get(name)
            .ok_or_else(|| HybridError::UnknownAtom(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.atoms.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &FunctionAtom> {
        self.atoms.values()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Everything needed to evaluate an expression.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    pub regions: RegionTable,
    pub atoms: AtomTable,
}

impl Env {
    pub fn new(regions: RegionTable, atoms: AtomTable) -> Self {
        Env { regions, atoms }
    }
}

/// Element of the free abelian group over function atom names.
///
/// Under a marked join, `f·g` stands for `f ⋆ g`; exponents count repeated
/// or inverted occurrences.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FreeWord(HybridSet<String>);

impl Default for FreeWord {
    fn default() -> Self {
        FreeWord::empty()
    }
}

impl FreeWord {
    pub fn empty() -> Self {
        FreeWord(HybridSet::new(WORD_SPACE))
    }

    pub fn atom(name: impl Into<String>) -> Self {
        FreeWord::from_exponents([(name.into(), 1)]).expect("single exponent cannot overflow")
    }

    pub fn from_exponents<I, S>(exps: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, i64)>,
        S: Into<String>,
    {
        HybridSet::from_entries(WORD_SPACE, exps.into_iter().map(|(s, k)| (s.into(), k))).map(FreeWord)
    }

    /// Product of the atoms, each with exponent 1.
    pub fn product<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        FreeWord::from_exponents(names.into_iter().map(|n| (n, 1)))
    }

    pub fn exponent(&self, atom: &str) -> i64 {
        self.0.multiplicity(&atom.to_string())
    }

    pub fn exponents(&self) -> impl Iterator<Item = (&str, i64)> + '_ {
        self.0.iter().map(|(a, k)| (a.as_str(), k))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.0.oplus(&other.0).map(FreeWord)
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        self.0.scalar(k).map(FreeWord)
    }

    /// Renders with the given operation symbol, e.g. `D1 + D2` or `f^-1 * g`.
    pub fn render(&self, symbol: &str) -> String {
        let mut out = String::new();
        for (k, (atom, e)) in self.exponents().enumerate() {
            if k > 0 {
                out.push(' ');
                out.push_str(symbol);
                out.push(' ');
            }
            out.push_str(atom);
            if e != 1 {
                out.push_str(&format!("^{e}"));
            }
        }
        out
    }

    /// Parses words such as `f`, `D1 + D2`, `f * g^2`, `S_ac >< T_db` or
    /// `f - g`. Any of `+ * . ><` separates factors; `-` inverts the
    /// following factor.
    pub fn parse(text: &str) -> Result<Self> {
        let mut exps: Vec<(String, i64)> = Vec::new();
        let mut rest = text.trim();
        let mut sign = 1i64;
        let mut expect_atom = true;
        let err = |m: &str| HybridError::Parse(format!("{m} in value word `{text}`"));
        while !rest.is_empty() {
            if expect_atom {
                if let Some(r) = rest.strip_prefix('-') {
                    sign = -sign;
                    rest = r.trim_start();
                    continue;
                }
                let end = rest
                    .find(|c: char| !(c.is_alphanumeric() || c == '_'))
                    .unwrap_or(rest.len());
                let name = &rest[..end];
                if !is_ident(name) {
                    return Err(err("expected function atom name"));
                }
                rest = rest[end..].trim_start();
                let mut e = 1i64;
                if let Some(r) = rest.strip_prefix('^') {
                    let r = r.trim_start();
                    let end = r
                        .char_indices()
                        .find(|&(k, c)| !(c.is_ascii_digit() || (k == 0 && c == '-')))
                        .map_or(r.len(), |(k, _)| k);
                    e = r[..end].parse().map_err(|_| err("invalid exponent"))?;
                    rest = r[end..].trim_start();
                }
                exps.push((name.to_string(), sign * e));
                sign = 1;
                expect_atom = false;
            } else {
                let after = ["><", "+", "*", "."]
                    .iter()
                    .find_map(|s| rest.strip_prefix(s))
                    .or_else(|| {
                        rest.starts_with('-').then(|| {
                            sign = -1;
                            &rest[1..]
                        })
                    })
                    .ok_or_else(|| err("expected separator"))?;
                rest = after.trim_start();
                expect_atom = true;
            }
        }
        if expect_atom {
            return Err(err("expected function atom"));
        }
        FreeWord::from_exponents(exps)
    }
}

/// `f^A`: a value word paired with a symbolic region.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HybridTerm {
    pub value: FreeWord,
    pub region: SymbolicHybridSet,
}

impl HybridTerm {
    pub fn new(value: FreeWord, region: SymbolicHybridSet) -> Self {
        HybridTerm { value, region }
    }

    /// `name^region` for a single atom.
    pub fn atom(name: impl Into<String>, region: SymbolicHybridSet) -> Self {
        HybridTerm::new(FreeWord::atom(name), region)
    }

    pub fn render(&self, symbol: &str) -> String {
        format!("term({}, {})", self.value.render(symbol), self.region)
    }
}

/// How the terms of an expression are combined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JoinOp {
    Join,
    Marked(StarOp),
}

/// A join or marked join of hybrid terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridExpr {
    pub op: JoinOp,
    pub terms: Vec<HybridTerm>,
}

impl From<HybridTerm> for HybridExpr {
    fn from(t: HybridTerm) -> Self {
        HybridExpr {
            op: JoinOp::Join,
            terms: vec![t],
        }
    }
}

impl HybridExpr {
    pub fn empty_join() -> Self {
        HybridExpr {
            op: JoinOp::Join,
            terms: Vec::new(),
        }
    }

    /// Plain join of the given terms, without merging.
    pub fn join_of(terms: Vec<HybridTerm>) -> Self {
        HybridExpr {
            op: JoinOp::Join,
            terms,
        }
    }

    pub fn star(&self) -> Option<&StarOp> {
        match &self.op {
            JoinOp::Join => None,
            JoinOp::Marked(s) => Some(s),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Symbol used between factors of a value word.
    pub fn word_symbol(&self) -> &str {
        self.star().map_or(".", StarOp::symbol)
    }

    /// Renders with region aliases, e.g. to print `P1` instead of its
    /// expansion.
    pub fn render_with(&self, aliases: &BTreeMap<SymbolicHybridSet, String>) -> String {
        let sym = self.word_symbol();
        let terms: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let region = aliases.get(&t.region).cloned().unwrap_or_else(|| t.region.to_string());
                format!("term({}, {region})", t.value.render(sym))
            })
            .collect();
        match &self.op {
            JoinOp::Join => format!("join({})", terms.join(", ")),
            JoinOp::Marked(s) => {
                let mut parts = vec![s.name().to_string()];
                parts.extend(terms);
                format!("mjoin({})", parts.join(", "))
            }
        }
    }

    /// Term multiset, for order-insensitive comparison.
    pub fn term_bag(&self) -> Vec<(String, String)> {
        let mut bag: Vec<(String, String)> = self
            .terms
            .iter()
            .map(|t| (t.value.render("."), t.region.to_string()))
            .collect();
        bag.sort();
        bag
    }
}

impl fmt::Display for HybridExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(&BTreeMap::new()))
    }
}

/// `a ⊛ b`: concatenates the terms, then merges terms with equal value
/// words and drops terms whose region vanished.
pub fn join(a: impl Into<HybridExpr>, b: impl Into<HybridExpr>) -> Result<HybridExpr> {
    let (a, b) = (a.into(), b.into());
    if a.op != JoinOp::Join || b.op != JoinOp::Join {
        return Err(HybridError::Contract("plain join cannot absorb a marked join".into()));
    }
    let mut terms = a.terms;
    terms.extend(b.terms);
    reduce_formally(&HybridExpr::join_of(terms))
}

/// Join marked with `star`. Terms are kept as given.
pub fn marked_join(star: StarOp, terms: Vec<HybridTerm>) -> Result<HybridExpr> {
    if !star.is_assoc_comm() {
        return Err(HybridError::Contract(format!(
            "`{}` is not declared associative and commutative",
            star.name()
        )));
    }
    Ok(HybridExpr {
        op: JoinOp::Marked(star),
        terms,
    })
}

/// Symbolic simplification: terms with equal value words are merged by
/// summing their regions (in first-occurrence order) and empty regions are
/// dropped. Value words are already in reduced form.
pub fn reduce_formally(e: &HybridExpr) -> Result<HybridExpr> {
    let mut merged: Vec<HybridTerm> = Vec::new();
    for t in &e.terms {
        if t.value.is_empty() {
            continue;
        }
        match merged.iter_mut().find(|m| m.value == t.value) {
            Some(m) => m.region = m.region.oplus(&t.region)?,
            None => merged.push(t.clone()),
        }
    }
    merged.retain(|t| !t.region.is_empty());
    Ok(HybridExpr {
        op: e.op.clone(),
        terms: merged,
    })
}
