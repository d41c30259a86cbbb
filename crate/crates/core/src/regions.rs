//! Symbolic region atoms and formal integer combinations of them.
//!
//! A [`SymbolicHybridSet`] is a formal Z-linear combination of named
//! [`RegionAtom`]s. Without a [`Valuation`] nothing is known about which
//! points an atom contains, so valuation-free manipulation is pure
//! coefficient arithmetic. Membership questions go through
//! [`RegionTable::multiplicity`], which needs a valuation for every
//! parameter an atom mentions.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::batch;
use crate::error::{HybridError, Result};
use crate::point::{fmt_rational, parse_rational, Point, Rational};
use crate::zmodule::{Element, HybridSet, DEFAULT_UNIVERSE};

/// Universe tag of the formal module spanned by region atoms.
const ATOM_SPACE: &str = "region-atoms";

/// A bound: a rational constant, or a parameter plus a rational offset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamExpr {
    pub param: Option<String>,
    pub offset: Rational,
}

impl ParamExpr {
    pub fn constant(c: Rational) -> Self {
        ParamExpr { param: None, offset: c }
    }

    pub fn param(name: impl Into<String>) -> Self {
        ParamExpr {
            param: Some(name.into()),
            offset: Rational::zero(),
        }
    }

    pub fn shifted(name: impl Into<String>, offset: Rational) -> Self {
        ParamExpr {
            param: Some(name.into()),
            offset,
        }
    }

    pub fn eval(&self, v: &Valuation) -> Result<Rational> {
        match &self.param {
            None => Ok(self.offset.clone()),
            Some(p) => Ok(v.get(p)? + &self.offset),
        }
    }

    /// Parses `3/2`, `a`, `h1+1` or `k2-1/2`.
    pub fn parse(text: &str) -> Result<Self> {
        let s = text.trim();
        let starts_ident = s.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_');
        if !starts_ident {
            return parse_rational(s).map(ParamExpr::constant);
        }
        let split = s.find(['+', '-']);
        let (name, offset) = match split {
            None => (s, Rational::zero()),
            Some(k) => {
                let off = parse_rational(s[k + 1..].trim())?;
                let off = if s.as_bytes()[k] == b'-' { -off } else { off };
                (s[..k].trim(), off)
            }
        };
        if !is_ident(name) {
            return Err(HybridError::Parse(format!("invalid bound `{s}`")));
        }
        Ok(ParamExpr::shifted(name, offset))
    }
}

impl fmt::Display for ParamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.param {
            None => f.write_str(&fmt_rational(&self.offset)),
            Some(p) if self.offset.is_zero() => f.write_str(p),
            Some(p) if self.offset < Rational::zero() => {
                write!(f, "{p}-{}", fmt_rational(&-self.offset.clone()))
            }
            Some(p) => write!(f, "{p}+{}", fmt_rational(&self.offset)),
        }
    }
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_') && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Assignment of rational values to symbolic parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation(BTreeMap<String, Rational>);

impl Valuation {
    pub fn new() -> Self {
        Valuation::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: Rational) -> Self {
        self.0.insert(name.into(), value);
        self
    }

    pub fn set(&mut self, name: impl Into<String>, value: Rational) {
        self.0.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Result<Rational> {
        self.0
            .get(name)
            .cloned()
            .ok_or_else(|| HybridError::MissingParameter(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Rational)> {
        self.0.iter()
    }

    /// Parses `a=1/2, b=3`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut v = Valuation::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| HybridError::Parse(format!("expected `name=value`, got `{part}`")))?;
            let name = name.trim();
            if !is_ident(name) {
                return Err(HybridError::Parse(format!("invalid parameter name `{name}`")));
            }
            v.set(name, parse_rational(value)?);
        }
        Ok(v)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (name, value)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}={}", fmt_rational(value))?;
        }
        Ok(())
    }
}

/// Geometric shape of a region atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegionShape {
    Interval {
        lo: ParamExpr,
        hi: ParamExpr,
        lo_closed: bool,
        hi_closed: bool,
    },
    /// Integer cells `(i, j)` with `row_lo <= i <= row_hi` and
    /// `col_lo <= j <= col_hi`.
    GridRect {
        row_lo: ParamExpr,
        row_hi: ParamExpr,
        col_lo: ParamExpr,
        col_hi: ParamExpr,
    },
    Universe,
    FinitePointSet(Vec<Point>),
}

impl RegionShape {
    pub fn interval(lo: ParamExpr, hi: ParamExpr, lo_closed: bool, hi_closed: bool) -> Self {
        RegionShape::Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    pub fn rect(row_lo: ParamExpr, row_hi: ParamExpr, col_lo: ParamExpr, col_hi: ParamExpr) -> Self {
        RegionShape::GridRect {
            row_lo,
            row_hi,
            col_lo,
            col_hi,
        }
    }

    /// Parameters this shape depends on.
    pub fn params(&self) -> Vec<&str> {
        let bounds: Vec<&ParamExpr> = match self {
            RegionShape::Interval { lo, hi, .. } => vec![lo, hi],
            RegionShape::GridRect {
                row_lo,
                row_hi,
                col_lo,
                col_hi,
            } => vec![row_lo, row_hi, col_lo, col_hi],
            _ => vec![],
        };
        bounds.into_iter().filter_map(|b| b.param.as_deref()).collect()
    }

    /// Membership indicator at `p` under `v`: 0 or 1.
    pub fn indicator(&self, p: &Point, v: &Valuation) -> Result<i64> {
        match self {
            RegionShape::Universe => Ok(1),
            RegionShape::FinitePointSet(points) => Ok(points.contains(p) as i64),
            RegionShape::Interval {
                lo,
                hi,
                lo_closed,
                hi_closed,
            } => {
                let [x] = p.coords() else {
                    return Err(dim_mismatch(1, p));
                };
                let lo = lo.eval(v)?;
                let hi = hi.eval(v)?;
                let above = if *lo_closed { *x >= lo } else { *x > lo };
                let below = if *hi_closed { *x <= hi } else { *x < hi };
                Ok((above && below) as i64)
            }
            RegionShape::GridRect {
                row_lo,
                row_hi,
                col_lo,
                col_hi,
            } => {
                let [i, j] = p.coords() else {
                    return Err(dim_mismatch(2, p));
                };
                let (r0, r1) = (row_lo.eval(v)?, row_hi.eval(v)?);
                let (c0, c1) = (col_lo.eval(v)?, col_hi.eval(v)?);
                if !i.is_integer() || !j.is_integer() {
                    return Ok(0);
                }
                Ok((r0 <= *i && *i <= r1 && c0 <= *j && *j <= c1) as i64)
            }
        }
    }
}

fn dim_mismatch(expected: usize, p: &Point) -> HybridError {
    HybridError::DimensionMismatch {
        expected: format!("{expected}-dimensional point"),
        found: format!("`{p}` of dimension {}", p.dim()),
    }
}

impl fmt::Display for RegionShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionShape::Universe => f.write_str("universe"),
            RegionShape::Interval {
                lo,
                hi,
                lo_closed,
                hi_closed,
            } => {
                let l = if *lo_closed { '[' } else { '(' };
                let r = if *hi_closed { ']' } else { ')' };
                write!(f, "interval{l}{lo}, {hi}{r}")
            }
            RegionShape::GridRect {
                row_lo,
                row_hi,
                col_lo,
                col_hi,
            } => write!(f, "rect({row_lo}..{row_hi}, {col_lo}..{col_hi})"),
            RegionShape::FinitePointSet(points) => {
                f.write_str("points{")?;
                for (k, p) in points.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str("}")
            }
        }
    }
}

/// A named region with indicator semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionAtom {
    pub name: String,
    pub shape: RegionShape,
}

impl RegionAtom {
    pub fn new(name: impl Into<String>, shape: RegionShape) -> Self {
        RegionAtom {
            name: name.into(),
            shape,
        }
    }

    pub fn indicator(&self, p: &Point, v: &Valuation) -> Result<i64> {
        self.shape.indicator(p, v)
    }
}

/// Formal Z-linear combination of region atoms, keyed by atom name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicHybridSet(HybridSet<String>);

impl PartialOrd for SymbolicHybridSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SymbolicHybridSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.terms().cmp(other.terms())
    }
}

impl Default for SymbolicHybridSet {
    fn default() -> Self {
        SymbolicHybridSet::empty()
    }
}

impl SymbolicHybridSet {
    pub fn empty() -> Self {
        SymbolicHybridSet(HybridSet::new(ATOM_SPACE))
    }

    /// `1·name`.
    pub fn atom(name: impl Into<String>) -> Self {
        Self::from_coeffs([(name.into(), 1)]).expect("single coefficient cannot overflow")
    }

    pub fn from_coeffs<I, S>(coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, i64)>,
        S: Into<String>,
    {
        HybridSet::from_entries(ATOM_SPACE, coeffs.into_iter().map(|(s, c)| (s.into(), c))).map(SymbolicHybridSet)
    }

    pub fn coeff(&self, atom: &str) -> i64 {
        self.0.multiplicity(&atom.to_string())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `(atom, coefficient)` pairs in name order.
    pub fn terms(&self) -> impl Iterator<Item = (&str, i64)> + '_ {
        self.0.iter().map(|(a, c)| (a.as_str(), c))
    }

    pub fn atoms(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.iter().map(|(a, _)| a.as_str())
    }

    pub fn oplus(&self, other: &Self) -> Result<Self> {
        self.0.oplus(&other.0).map(SymbolicHybridSet)
    }

    pub fn ominus(&self, other: &Self) -> Result<Self> {
        self.0.ominus(&other.0).map(SymbolicHybridSet)
    }

    pub fn scale(&self, n: i64) -> Result<Self> {
        self.0.scalar(n).map(SymbolicHybridSet)
    }

    pub fn negate(&self) -> Result<Self> {
        self.scale(-1)
    }

    /// Σ cᵢ·Sᵢ.
    pub fn combination<'a, I>(parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, &'a SymbolicHybridSet)>,
    {
        let mut acc = SymbolicHybridSet::empty();
        for (c, s) in parts {
            if c != 0 {
                acc = acc.oplus(&s.scale(c)?)?;
            }
        }
        Ok(acc)
    }

    /// Parses `U - (A1 + B1)`, `2*A1 - B2`, `-A1`, or `0`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = ExprCursor { src: text, pos: 0 };
        let s = p.sum()?;
        p.skip_ws();
        if p.pos < text.len() {
            return Err(HybridError::Parse(format!(
                "unexpected `{}` in region expression `{text}`",
                &text[p.pos..]
            )));
        }
        Ok(s)
    }
}

impl fmt::Display for SymbolicHybridSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        let pos = self.terms().filter(|(_, c)| *c > 0);
        let neg = self.terms().filter(|(_, c)| *c < 0);
        for (k, (atom, c)) in pos.chain(neg).enumerate() {
            let mag = c.unsigned_abs();
            match (k, c < 0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if mag != 1 {
                write!(f, "{mag}*")?;
            }
            f.write_str(atom)?;
        }
        Ok(())
    }
}

struct ExprCursor<'a> {
    src: &'a str,
    pos: usize,
}

impl ExprCursor<'_> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn err(&self, what: &str) -> HybridError {
        HybridError::Parse(format!("{what} at offset {} in `{}`", self.pos, self.src))
    }

    fn sum(&mut self) -> Result<SymbolicHybridSet> {
        let mut acc = self.signed_term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = acc.oplus(&self.signed_term()?)?;
                }
                Some('-') => {
                    self.pos += 1;
                    acc = acc.ominus(&self.signed_term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn signed_term(&mut self) -> Result<SymbolicHybridSet> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return self.signed_term()?.negate();
        }
        let mut coeff = 1i64;
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let start = self.pos;
            while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit()) {
                self.pos += 1;
            }
            coeff = self.src[start..self.pos]
                .parse()
                .map_err(|_| self.err("coefficient out of range"))?;
            if self.peek() == Some('*') {
                self.pos += 1;
            } else {
                // A bare integer is only meaningful as the empty set `0`.
                if coeff == 0 {
                    return Ok(SymbolicHybridSet::empty());
                }
                return Err(self.err("expected `*` after coefficient"));
            }
        }
        let base = self.primary()?;
        base.scale(coeff)
    }

    fn primary(&mut self) -> Result<SymbolicHybridSet> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.src[self.pos..].starts_with(|c: char| c.is_alphanumeric() || c == '_') {
                    self.pos += self.src[self.pos..].chars().next().unwrap().len_utf8();
                }
                Ok(SymbolicHybridSet::atom(&self.src[start..self.pos]))
            }
            _ => Err(self.err("expected region name")),
        }
    }
}

/// Registry of region atoms, resolving names during evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegionTable {
    atoms: BTreeMap<String, RegionAtom>,
}

impl RegionTable {
    pub fn new() -> Self {
        RegionTable::default()
    }

    /// Registers an atom; names must be unique.
    pub fn insert(&mut self, atom: RegionAtom) -> Result<()> {
        if self.atoms.contains_key(&atom.name) {
            return Err(HybridError::Contract(format!("duplicate region `{}`", atom.name)));
        }
        self.atoms.insert(atom.name.clone(), atom);
        Ok(())
    }

    /// Inserts `atom`, or accepts it if an identical atom is present.
    pub fn ensure(&mut self, atom: RegionAtom) -> Result<()> {
        match self.atoms.get(&atom.name) {
            Some(existing) if *existing == atom => Ok(()),
            Some(_) => Err(HybridError::Contract(format!(
                "region `{}` is already declared differently",
                atom.name
            ))),
            None => self.insert(atom),
        }
    }

    pub fn with(mut self, atom: RegionAtom) -> Self {
        self.atoms.insert(atom.name.clone(), atom);
        self
    }

    pub fn get(&self, name: &str) -> Result<&RegionAtom> {
        self.atoms
            .get(name)
            .ok_or_else(|| HybridError::UnknownRegion(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.atoms.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RegionAtom> {
        self.atoms.values()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Σ coefficient · indicator over the atoms of `s`.
    pub fn multiplicity(&self, s: &SymbolicHybridSet, p: &Point, v: &Valuation) -> Result<i64> {
        let mut total = 0i64;
        for (name, coeff) in s.terms() {
            let ind = self.get(name)?.indicator(p, v)?;
            if ind != 0 {
                total = total
                    .checked_add(coeff)
                    .ok_or(HybridError::Overflow("region multiplicity"))?;
            }
        }
        Ok(total)
    }

    /// Concrete hybrid set over the sample points.
    pub fn instantiate(&self, s: &SymbolicHybridSet, v: &Valuation, sample: &[Point]) -> Result<HybridSet> {
        let mults = batch::map(sample, |p| self.multiplicity(s, p, v));
        let mut out = HybridSet::new(DEFAULT_UNIVERSE);
        for (p, m) in sample.iter().zip(mults) {
            out.add(Element::Point(p.clone()), m?)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::{int, ratio};

    fn interval(name: &str, lo: Rational, hi: Rational, lc: bool, hc: bool) -> RegionAtom {
        RegionAtom::new(
            name,
            RegionShape::interval(ParamExpr::constant(lo), ParamExpr::constant(hi), lc, hc),
        )
    }

    #[test]
    fn interval_openness_is_exact() {
        let r = interval("R", int(0), int(1), true, false);
        let v = Valuation::new();
        assert_eq!(r.indicator(&Point::scalar(ratio(1, 2)), &v).unwrap(), 1);
        assert_eq!(r.indicator(&Point::scalar(int(1)), &v).unwrap(), 0);
        assert_eq!(r.indicator(&Point::scalar(int(0)), &v).unwrap(), 1);
    }

    #[test]
    fn grid_rect_uses_integer_cells() {
        let a1 = RegionAtom::new(
            "A1",
            RegionShape::rect(
                ParamExpr::constant(int(1)),
                ParamExpr::param("h1"),
                ParamExpr::constant(int(1)),
                ParamExpr::param("k1"),
            ),
        );
        let v = Valuation::new().with("h1", int(5)).with("k1", int(4));
        assert_eq!(a1.indicator(&Point::cell(2, 3), &v).unwrap(), 1);
        assert_eq!(a1.indicator(&Point::cell(6, 3), &v).unwrap(), 0);
        let half = Point(vec![ratio(3, 2), int(1)]);
        assert_eq!(a1.indicator(&half, &v).unwrap(), 0);
        assert!(matches!(
            a1.indicator(&Point::scalar(int(1)), &v),
            Err(HybridError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn missing_parameter_is_reported() {
        let r = RegionAtom::new(
            "P",
            RegionShape::interval(ParamExpr::constant(int(0)), ParamExpr::param("a"), true, false),
        );
        assert_eq!(
            r.indicator(&Point::scalar(int(0)), &Valuation::new()),
            Err(HybridError::MissingParameter("a".into()))
        );
    }

    #[test]
    fn empty_instantiated_interval_has_zero_indicator() {
        let r = interval("E", int(2), int(1), true, true);
        for k in 0..4 {
            assert_eq!(r.indicator(&Point::scalar(int(k)), &Valuation::new()).unwrap(), 0);
        }
    }

    fn spill_table() -> RegionTable {
        RegionTable::new()
            .with(interval("I1", int(-1), int(0), true, false))
            .with(interval("I2", int(1), int(2), false, true))
            .with(interval("I3", int(-1), int(2), true, true))
    }

    #[test]
    fn spill_over_refinement_multiplicities() {
        let t = spill_table();
        let q = SymbolicHybridSet::parse("-I1 - I2 + I3").unwrap();
        let v = Valuation::new();
        assert_eq!(t.multiplicity(&q, &Point::scalar(ratio(1, 2)), &v).unwrap(), 1);
        // Indicators 0, 1, 1 with signs -, -, +.
        assert_eq!(t.multiplicity(&q, &Point::scalar(ratio(3, 2)), &v).unwrap(), 0);
        assert_eq!(
            t.multiplicity(&SymbolicHybridSet::empty(), &Point::scalar(int(7)), &v)
                .unwrap(),
            0
        );
    }

    #[test]
    fn instantiate_over_samples() {
        let t = RegionTable::new()
            .with(RegionAtom::new("U", RegionShape::Universe))
            .with(interval("P", int(0), int(1), true, true));
        let v = Valuation::new();
        let sample: Vec<Point> = [int(0), ratio(1, 2), int(1)].into_iter().map(Point::scalar).collect();
        let h = t.instantiate(&SymbolicHybridSet::atom("U"), &v, &sample).unwrap();
        assert_eq!(h.to_string(), "{0^1, 1/2^1, 1^1}");
        let neg = SymbolicHybridSet::atom("P").negate().unwrap();
        let h = t.instantiate(&neg, &v, &sample[1..2]).unwrap();
        assert_eq!(h.to_string(), "{1/2^-1}");
    }

    #[test]
    fn region_expressions_parse_and_print() {
        let s = SymbolicHybridSet::parse("U - (A1 + B1 + C1) - (A2 + B2 + C2)").unwrap();
        assert_eq!(s.to_string(), "U - A1 - A2 - B1 - B2 - C1 - C2");
        assert_eq!(SymbolicHybridSet::parse(&s.to_string()).unwrap(), s);
        let t = SymbolicHybridSet::parse("2*A - B + B - 3*C").unwrap();
        assert_eq!(t.to_string(), "2*A - 3*C");
        assert!(SymbolicHybridSet::parse("0").unwrap().is_empty());
        assert!(SymbolicHybridSet::parse("A +").is_err());
        assert!(SymbolicHybridSet::parse("3 A").is_err());
    }

    #[test]
    fn param_exprs_parse() {
        assert_eq!(ParamExpr::parse("h1+1").unwrap(), ParamExpr::shifted("h1", int(1)));
        assert_eq!(
            ParamExpr::parse("k-1/2").unwrap(),
            ParamExpr::shifted("k", ratio(-1, 2))
        );
        assert_eq!(ParamExpr::parse("-3").unwrap(), ParamExpr::constant(int(-3)));
        assert_eq!(ParamExpr::parse("h1+1").unwrap().to_string(), "h1+1");
        assert_eq!(ParamExpr::parse("k-1/2").unwrap().to_string(), "k-1/2");
        assert!(ParamExpr::parse("1+a").is_err());
    }

    #[test]
    fn valuations_parse() {
        let v = Valuation::parse("a=1/2, b = 3").unwrap();
        assert_eq!(v.get("a").unwrap(), ratio(1, 2));
        assert_eq!(v.to_string(), "a=1/2, b=3");
        assert!(Valuation::parse("a").is_err());
    }
}
