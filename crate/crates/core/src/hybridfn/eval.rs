//! Pointwise evaluation of hybrid expressions.

use std::fmt;

use super::{AtomValue, Env, FreeWord, HybridExpr, JoinOp, StarOp};
use crate::error::{HybridError, Result};
use crate::point::{fmt_rational, Point, Rational};
use crate::regions::Valuation;
use crate::zmodule::{Element, HybridSet, DEFAULT_UNIVERSE};

/// A value produced by evaluation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Scalar(Rational),
    /// A residual word over opaque atoms, optionally combined with a scalar
    /// part, e.g. `S_ac >< T_ad` or `f + 3`.
    Formal {
        word: FreeWord,
        scalar: Option<Rational>,
        symbol: String,
    },
}

impl Value {
    pub fn as_scalar(&self) -> Option<&Rational> {
        match self {
            Value::Scalar(r) => Some(r),
            Value::Formal { .. } => None,
        }
    }

    fn element(&self) -> Element {
        match self {
            Value::Scalar(r) => Element::scalar(r.clone()),
            Value::Formal { .. } => Element::token(self.to_string()),
        }
    }
}

impl PartialOrd for FreeWord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FreeWord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.exponents().cmp(other.exponents())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(r) => f.write_str(&fmt_rational(r)),
            Value::Formal { word, scalar, symbol } => {
                f.write_str(&word.render(symbol))?;
                if let Some(s) = scalar {
                    write!(f, " {symbol} {}", fmt_rational(s))?;
                }
                Ok(())
            }
        }
    }
}

/// Result of evaluating at one point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalOutcome {
    /// No net contribution at the point, or the value is `⊥`.
    Undefined,
    Value {
        value: Value,
        multiplicity: i64,
    },
    /// Several incompatible values: a hybrid relation, not a function.
    Relation(Vec<(Value, i64)>),
}

impl EvalOutcome {
    fn scalar(r: Rational) -> Self {
        EvalOutcome::Value {
            value: Value::Scalar(r),
            multiplicity: 1,
        }
    }

    pub fn is_undefined(&self) -> bool {
        matches!(self, EvalOutcome::Undefined)
    }

    /// The value if it is a single scalar of multiplicity one.
    pub fn as_scalar(&self) -> Option<&Rational> {
        match self {
            EvalOutcome::Value { value, multiplicity: 1 } => value.as_scalar(),
            _ => None,
        }
    }

    /// `(value, multiplicity)` pairs, empty when undefined.
    pub fn pairs(&self) -> Vec<(Value, i64)> {
        match self {
            EvalOutcome::Undefined => Vec::new(),
            EvalOutcome::Value { value, multiplicity } => vec![(value.clone(), *multiplicity)],
            EvalOutcome::Relation(ps) => ps.clone(),
        }
    }

    fn from_pairs(mut pairs: Vec<(Value, i64)>) -> Self {
        pairs.retain(|(_, m)| *m != 0);
        match pairs.len() {
            0 => EvalOutcome::Undefined,
            1 => {
                let (value, multiplicity) = pairs.pop().expect("one pair");
                EvalOutcome::Value { value, multiplicity }
            }
            _ => EvalOutcome::Relation(pairs),
        }
    }
}

impl fmt::Display for EvalOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalOutcome::Undefined => f.write_str("undefined"),
            EvalOutcome::Value { value, multiplicity: 1 } => write!(f, "{value}"),
            EvalOutcome::Value { value, multiplicity } => write!(f, "{value} (multiplicity {multiplicity})"),
            EvalOutcome::Relation(ps) => {
                let parts: Vec<String> = ps.iter().map(|(v, m)| format!("{v}^{m}")).collect();
                write!(f, "relation {{{}}}", parts.join(", "))
            }
        }
    }
}

/// Net exponent vector `Σ m_t · word_t` at the point.
fn combined_word(e: &HybridExpr, env: &Env, p: &Point, v: &Valuation) -> Result<FreeWord> {
    let mut acc = FreeWord::empty();
    for t in &e.terms {
        let m = env.regions.multiplicity(&t.region, p, v)?;
        if m != 0 {
            acc = acc.mul(&t.value.pow(m)?)?;
        }
    }
    Ok(acc)
}

/// Evaluates `e` at `p`.
///
/// The term words are first combined in the free abelian group over atom
/// names, each weighted by its region's multiplicity at `p`. An empty
/// result is [`EvalOutcome::Undefined`]. A plain join then groups the
/// surviving atoms by value; a marked join folds them with its operation.
pub fn eval(e: &HybridExpr, env: &Env, p: &Point, v: &Valuation) -> Result<EvalOutcome> {
    let word = combined_word(e, env, p, v)?;
    if word.is_empty() {
        return Ok(EvalOutcome::Undefined);
    }
    match &e.op {
        JoinOp::Join => eval_join(&word, env, p, v),
        JoinOp::Marked(star) => fold_word(star, &word, env, p, v),
    }
}

fn eval_join(word: &FreeWord, env: &Env, p: &Point, v: &Valuation) -> Result<EvalOutcome> {
    let mut pairs: Vec<(Value, i64)> = Vec::new();
    let several = word.len() > 1;
    for (name, k) in word.exponents() {
        match env.atoms.get(name)?.value_at(p, v)? {
            AtomValue::Undefined => {}
            AtomValue::Opaque if several => {
                return Err(HybridError::OpaqueAtom(format!(
                    "cannot decide compatibility of opaque `{name}` with other atoms at {p}"
                )))
            }
            AtomValue::Opaque => pairs.push((
                Value::Formal {
                    word: FreeWord::atom(name),
                    scalar: None,
                    symbol: ".".into(),
                },
                k,
            )),
            AtomValue::Scalar(r) => {
                let value = Value::Scalar(r);
                match pairs.iter_mut().find(|(w, _)| *w == value) {
                    Some((_, m)) => *m = m.checked_add(k).ok_or(HybridError::Overflow("join multiplicity"))?,
                    None => pairs.push((value, k)),
                }
            }
        }
    }
    pairs.sort();
    Ok(EvalOutcome::from_pairs(pairs))
}

/// Folds a reduced word with `star`. Opaque atoms stay formal.
fn fold_word(star: &StarOp, word: &FreeWord, env: &Env, p: &Point, v: &Valuation) -> Result<EvalOutcome> {
    let mut acc: Option<Rational> = None;
    let mut formal: Vec<(String, i64)> = Vec::new();
    for (name, k) in word.exponents() {
        if !star.supports_exponent(k) {
            return Err(HybridError::NonEvaluable(format!(
                "`{name}` has exponent {k} at {p}, which `{}` cannot fold",
                star.name()
            )));
        }
        match env.atoms.get(name)?.value_at(p, v)? {
            AtomValue::Undefined => return Ok(EvalOutcome::Undefined),
            AtomValue::Opaque => {
                let k = if star.is_idempotent() && k > 0 { 1 } else { k };
                formal.push((name.to_string(), k));
            }
            AtomValue::Scalar(r) => {
                let r = star.power(&r, k)?;
                acc = Some(match acc {
                    None => r,
                    Some(a) => star.apply(&a, &r)?,
                });
            }
        }
    }
    if formal.is_empty() {
        return Ok(match acc {
            Some(r) => EvalOutcome::scalar(r),
            None => EvalOutcome::scalar(
                star.unit()
                    .cloned()
                    .ok_or_else(|| HybridError::NonEvaluable(format!("`{}` has no unit", star.name())))?,
            ),
        });
    }
    let scalar = acc.filter(|a| star.unit() != Some(a));
    Ok(EvalOutcome::Value {
        value: Value::Formal {
            word: FreeWord::from_exponents(formal)?,
            scalar,
            symbol: star.symbol().to_string(),
        },
        multiplicity: 1,
    })
}

/// Evaluation through term graphs: every term contributes the pair
/// `(p, value of its word)` with its region's multiplicity, and equal
/// values are summed. A word that cancels to nothing stands for the unit.
///
/// For a plain join this coincides with [`eval`]. For a marked join it
/// keeps the multiplicity that [`eval`] folds away.
pub fn term_graph_value(e: &HybridExpr, env: &Env, p: &Point, v: &Valuation) -> Result<EvalOutcome> {
    let star = match &e.op {
        JoinOp::Join => return eval(e, env, p, v),
        JoinOp::Marked(s) => s,
    };
    let mut pairs: Vec<(Value, i64)> = Vec::new();
    for t in &e.terms {
        let m = env.regions.multiplicity(&t.region, p, v)?;
        if m == 0 {
            continue;
        }
        let value = if t.value.is_empty() {
            Value::Scalar(
                star.unit()
                    .cloned()
                    .ok_or_else(|| HybridError::NonEvaluable(format!("`{}` has no unit", star.name())))?,
            )
        } else {
            match fold_word(star, &t.value, env, p, v)? {
                EvalOutcome::Value { value, .. } => value,
                _ => continue,
            }
        };
        match pairs.iter_mut().find(|(w, _)| *w == value) {
            Some((_, k)) => {
                *k = k
                    .checked_add(m)
                    .ok_or(HybridError::Overflow("term graph multiplicity"))?
            }
            None => pairs.push((value, m)),
        }
    }
    pairs.sort();
    Ok(EvalOutcome::from_pairs(pairs))
}

/// Graph of a plain join over the sample: `⊕ m · ⟬(p, f(p))⟭`.
///
/// Opaque atoms appear as the pair `(p, name)`.
pub fn graph(e: &HybridExpr, env: &Env, v: &Valuation, sample: &[Point]) -> Result<HybridSet> {
    if e.op != JoinOp::Join {
        return Err(HybridError::Contract("graph is defined for plain joins only".into()));
    }
    let mut out = HybridSet::new(DEFAULT_UNIVERSE);
    for p in sample {
        for t in &e.terms {
            let m = env.regions.multiplicity(&t.region, p, v)?;
            if m == 0 {
                continue;
            }
            for (name, k) in t.value.exponents() {
                let val = match env.atoms.get(name)?.value_at(p, v)? {
                    AtomValue::Scalar(r) => Element::scalar(r),
                    AtomValue::Opaque => Element::token(name),
                    AtomValue::Undefined => continue,
                };
                let mult = m.checked_mul(k).ok_or(HybridError::Overflow("graph multiplicity"))?;
                out.add(Element::pair(Element::Point(p.clone()), val), mult)?;
            }
        }
    }
    Ok(out)
}

/// Pairs every sampled point with its evaluated value(s).
pub fn pseudo_graph(e: &HybridExpr, env: &Env, v: &Valuation, sample: &[Point]) -> Result<HybridSet> {
    let outcomes = crate::batch::map(sample, |p| eval(e, env, p, v));
    let mut out = HybridSet::new(DEFAULT_UNIVERSE);
    for (p, o) in sample.iter().zip(outcomes) {
        for (val, m) in o?.pairs() {
            out.add(Element::pair(Element::Point(p.clone()), val.element()), m)?;
        }
    }
    Ok(out)
}

/// True iff at every sampled point the expression has net multiplicity 0
/// or 1 and a single value.
pub fn is_reducible(e: &HybridExpr, env: &Env, v: &Valuation, sample: &[Point]) -> Result<bool> {
    let outcomes = crate::batch::map(sample, |p| eval(e, env, p, v));
    for o in outcomes {
        match o {
            Ok(EvalOutcome::Undefined) | Ok(EvalOutcome::Value { multiplicity: 1, .. }) => {}
            Ok(_) => return Ok(false),
            Err(HybridError::OpaqueAtom(_)) => return Ok(false),
            Err(err) => return Err(err),
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::super::{join, marked_join, reduce_formally, AtomTable, FunctionAtom, HybridTerm, ScalarExpr};
    use super::*;
    use crate::point::{int, ratio};
    use crate::regions::{ParamExpr, RegionAtom, RegionShape, RegionTable, SymbolicHybridSet};

    fn r(s: &str) -> SymbolicHybridSet {
        SymbolicHybridSet::parse(s).unwrap()
    }

    fn unit_interval_env() -> Env {
        let iv = |name: &str, lo: Rational, hi: Rational| {
            RegionAtom::new(
                name,
                RegionShape::interval(ParamExpr::constant(lo), ParamExpr::constant(hi), true, false),
            )
        };
        let regions = RegionTable::new()
            .with(iv("U", int(0), int(1)))
            .with(iv("A", int(0), ratio(1, 2)))
            .with(iv("B", ratio(1, 4), ratio(3, 4)));
        let atoms = AtomTable::new()
            .with(FunctionAtom::constant("f", int(2)))
            .with(FunctionAtom::constant("g", int(5)))
            .with(FunctionAtom::constant("h", int(2)))
            .with(FunctionAtom::with_body(
                "inv",
                ScalarExpr::parse("1/(x - 1/2)").unwrap(),
            ))
            .with(FunctionAtom::opaque("S"))
            .with(FunctionAtom::opaque("T"));
        Env::new(regions, atoms)
    }

    fn at(x: Rational) -> Point {
        Point::scalar(x)
    }

    #[test]
    fn join_of_one_term_is_the_function() {
        let env = unit_interval_env();
        let e = HybridExpr::from(HybridTerm::atom("f", r("A")));
        let v = Valuation::new();
        assert_eq!(eval(&e, &env, &at(ratio(1, 8)), &v).unwrap().as_scalar(), Some(&int(2)));
        assert!(eval(&e, &env, &at(ratio(7, 8)), &v).unwrap().is_undefined());
    }

    #[test]
    fn incompatible_join_is_a_relation() {
        let env = unit_interval_env();
        let e = join(HybridTerm::atom("f", r("A")), HybridTerm::atom("g", r("B"))).unwrap();
        let v = Valuation::new();
        let out = eval(&e, &env, &at(ratio(3, 8)), &v).unwrap();
        assert_eq!(
            out,
            EvalOutcome::Relation(vec![(Value::Scalar(int(2)), 1), (Value::Scalar(int(5)), 1)])
        );
        assert_eq!(eval(&e, &env, &at(ratio(5, 8)), &v).unwrap().as_scalar(), Some(&int(5)));
    }

    #[test]
    fn compatible_atoms_add_multiplicities() {
        let env = unit_interval_env();
        let e = join(HybridTerm::atom("f", r("U")), HybridTerm::atom("h", r("U"))).unwrap();
        let out = eval(&e, &env, &at(int(0)), &Valuation::new()).unwrap();
        assert_eq!(
            out,
            EvalOutcome::Value {
                value: Value::Scalar(int(2)),
                multiplicity: 2
            }
        );
    }

    #[test]
    fn marked_join_folds_values() {
        let env = unit_interval_env();
        let e = marked_join(
            StarOp::mul(),
            vec![HybridTerm::atom("f", r("A")), HybridTerm::atom("g", r("B"))],
        )
        .unwrap();
        let v = Valuation::new();
        assert_eq!(
            eval(&e, &env, &at(ratio(3, 8)), &v).unwrap().as_scalar(),
            Some(&int(10))
        );
        assert_eq!(eval(&e, &env, &at(ratio(1, 8)), &v).unwrap().as_scalar(), Some(&int(2)));
    }

    #[test]
    fn marked_join_with_negative_region_needs_a_group() {
        let env = unit_interval_env();
        let terms = vec![HybridTerm::atom("f", r("U - A"))];
        let v = Valuation::new();
        let p = at(ratio(1, 8));
        let add = marked_join(StarOp::add(), terms.clone()).unwrap();
        assert!(eval(&add, &env, &p, &v).unwrap().is_undefined());
        let add = marked_join(StarOp::add(), vec![HybridTerm::atom("f", r("A - U - U"))]).unwrap();
        assert_eq!(eval(&add, &env, &p, &v).unwrap().as_scalar(), Some(&int(-2)));
        let mul = marked_join(StarOp::mul(), vec![HybridTerm::atom("f", r("A - U - U"))]).unwrap();
        assert!(matches!(eval(&mul, &env, &p, &v), Err(HybridError::NonEvaluable(_))));
    }

    #[test]
    fn undefined_atom_values() {
        let env = unit_interval_env();
        let v = Valuation::new();
        let p = at(ratio(1, 2));
        let joined = join(HybridTerm::atom("inv", r("U")), HybridTerm::atom("f", r("U"))).unwrap();
        assert_eq!(eval(&joined, &env, &p, &v).unwrap().as_scalar(), Some(&int(2)));
        let marked = marked_join(
            StarOp::add(),
            vec![HybridTerm::atom("inv", r("U")), HybridTerm::atom("f", r("U"))],
        )
        .unwrap();
        assert!(eval(&marked, &env, &p, &v).unwrap().is_undefined());
    }

    #[test]
    fn opaque_atoms_stay_formal() {
        let env = unit_interval_env();
        let v = Valuation::new();
        let p = at(ratio(3, 8));
        let e = marked_join(
            StarOp::merge(),
            vec![
                HybridTerm::new(FreeWord::product(["S", "T"]).unwrap(), r("A")),
                HybridTerm::atom("T", r("-A")),
            ],
        )
        .unwrap();
        let out = eval(&e, &env, &p, &v).unwrap();
        assert_eq!(out.to_string(), "S");
        let e = marked_join(
            StarOp::add(),
            vec![HybridTerm::atom("S", r("A")), HybridTerm::atom("g", r("B"))],
        )
        .unwrap();
        assert_eq!(eval(&e, &env, &p, &v).unwrap().to_string(), "S + 5");
        let j = join(HybridTerm::atom("S", r("A")), HybridTerm::atom("g", r("B"))).unwrap();
        assert!(matches!(eval(&j, &env, &p, &v), Err(HybridError::OpaqueAtom(_))));
        let j = HybridExpr::from(HybridTerm::atom("S", r("A")));
        assert_eq!(eval(&j, &env, &p, &v).unwrap().to_string(), "S");
    }

    #[test]
    fn idempotent_merge_clamps_repeats() {
        let env = unit_interval_env();
        let e = marked_join(StarOp::merge(), vec![HybridTerm::atom("S", r("A + B"))]).unwrap();
        let out = eval(&e, &env, &at(ratio(3, 8)), &Valuation::new()).unwrap();
        assert_eq!(out.to_string(), "S");
    }

    #[test]
    fn formal_reduction_preserves_values() {
        let env = unit_interval_env();
        let v = Valuation::new();
        let e = HybridExpr::join_of(vec![
            HybridTerm::atom("f", r("A")),
            HybridTerm::atom("g", r("B")),
            HybridTerm::atom("g", r("-B")),
        ]);
        let red = reduce_formally(&e).unwrap();
        assert_eq!(red.terms.len(), 1);
        for k in 0..20 {
            let p = at(ratio(k, 20));
            assert_eq!(eval(&e, &env, &p, &v).unwrap(), eval(&red, &env, &p, &v).unwrap());
        }
    }

    #[test]
    fn reducibility_on_samples() {
        let env = unit_interval_env();
        let v = Valuation::new();
        let sample: Vec<Point> = (0..20).map(|k| at(ratio(k, 20))).collect();
        let whole = HybridExpr::from(HybridTerm::atom("f", r("U")));
        assert!(is_reducible(&whole, &env, &v, &sample).unwrap());
        let doubled = join(HybridTerm::atom("f", r("A")), HybridTerm::atom("f", r("A"))).unwrap();
        assert!(!is_reducible(&doubled, &env, &v, &sample).unwrap());
        let rel = join(HybridTerm::atom("f", r("U")), HybridTerm::atom("g", r("U"))).unwrap();
        assert!(!is_reducible(&rel, &env, &v, &sample).unwrap());
    }

    #[test]
    fn graph_matches_pseudo_graph_for_functions() {
        let env = unit_interval_env();
        let v = Valuation::new();
        let sample: Vec<Point> = (0..8).map(|k| at(ratio(k, 8))).collect();
        let e = join(HybridTerm::atom("f", r("A")), HybridTerm::atom("g", r("U - A"))).unwrap();
        let g = graph(&e, &env, &v, &sample).unwrap();
        assert_eq!(g, pseudo_graph(&e, &env, &v, &sample).unwrap());
        assert!(g.is_reducible());
        assert_eq!(g.len(), 8);
    }

    #[test]
    fn term_graph_keeps_multiplicity() {
        let env = unit_interval_env();
        let v = Valuation::new();
        let fi = FreeWord::from_exponents([("f", 1), ("f", -1)]).unwrap();
        let e = marked_join(StarOp::add(), vec![HybridTerm::new(fi, r("2*U"))]).unwrap();
        let p = at(int(0));
        assert_eq!(
            term_graph_value(&e, &env, &p, &v).unwrap(),
            EvalOutcome::Value {
                value: Value::Scalar(int(0)),
                multiplicity: 2
            }
        );
        assert!(eval(&e, &env, &p, &v).unwrap().is_undefined());
    }
}
