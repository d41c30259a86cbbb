//! Hybrid sets: finite-support maps from elements to signed integer
//! multiplicities, with their Z-module structure.
//!
//! Every [`HybridSet`] is kept in normal form: one entry per element and no
//! zero multiplicities. Arithmetic is checked; an overflow is reported as
//! [`HybridError::Overflow`] instead of wrapping.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{HybridError, Result};
use crate::point::{parse_rational, Point, Rational};

/// Universe tag used when none is given.
pub const DEFAULT_UNIVERSE: &str = "U";

/// Carrier for members of a universe.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    /// Point with rational coordinates.
    Point(Point),
    /// Opaque named token.
    Token(String),
    /// `(x, v)` pair, used for function graphs.
    Pair(Box<Element>, Box<Element>),
}

impl Element {
    pub fn token(name: impl Into<String>) -> Self {
        Element::Token(name.into())
    }

    pub fn pair(x: Element, v: Element) -> Self {
        Element::Pair(Box::new(x), Box::new(v))
    }

    pub fn scalar(r: Rational) -> Self {
        Element::Point(Point::scalar(r))
    }
}

impl From<Point> for Element {
    fn from(p: Point) -> Self {
        Element::Point(p)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Point(p) => write!(f, "{p}"),
            Element::Token(t) => f.write_str(t),
            Element::Pair(x, v) => write!(f, "<{x},{v}>"),
        }
    }
}

/// A hybrid set over a tagged universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HybridSet<E: Ord = Element> {
    universe: String,
    entries: BTreeMap<E, i64>,
}

impl<E: Ord + Clone> HybridSet<E> {
    /// The empty hybrid set over `universe`.
    pub fn new(universe: impl Into<String>) -> Self {
        HybridSet {
            universe: universe.into(),
            entries: BTreeMap::new(),
        }
    }

    /// Normalises an arbitrary list of `(element, multiplicity)` pairs,
    /// merging duplicates and dropping zeros.
    pub fn from_entries<I>(universe: impl Into<String>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (E, i64)>,
    {
        let mut h = HybridSet::new(universe);
        for (e, m) in entries {
            h.add(e, m)?;
        }
        Ok(h)
    }

    /// Adds `m` to the multiplicity of `e`.
    pub fn add(&mut self, e: E, m: i64) -> Result<()> {
        if m == 0 {
            return Ok(());
        }
        let cur = self.entries.get(&e).copied().unwrap_or(0);
        let next = cur.checked_add(m).ok_or(HybridError::Overflow("multiplicity sum"))?;
        if next == 0 {
            self.entries.remove(&e);
        } else {
            self.entries.insert(e, next);
        }
        Ok(())
    }

    pub fn universe(&self) -> &str {
        &self.universe
    }

    pub fn multiplicity(&self, e: &E) -> i64 {
        self.entries.get(e).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Entries in element order.
    pub fn iter(&self) -> impl Iterator<Item = (&E, i64)> + '_ {
        self.entries.iter().map(|(e, m)| (e, *m))
    }

    fn check_universe(&self, other: &Self) -> Result<()> {
        if self.universe != other.universe {
            return Err(HybridError::UniverseMismatch {
                left: self.universe.clone(),
                right: other.universe.clone(),
            });
        }
        Ok(())
    }

    /// Pointwise sum.
    pub fn oplus(&self, other: &Self) -> Result<Self> {
        self.check_universe(other)?;
        let mut out = self.clone();
        for (e, m) in other.iter() {
            out.add(e.clone(), m)?;
        }
        Ok(out)
    }

    /// Pointwise difference.
    pub fn ominus(&self, other: &Self) -> Result<Self> {
        self.check_universe(other)?;
        let mut out = self.clone();
        for (e, m) in other.iter() {
            let neg = m.checked_neg().ok_or(HybridError::Overflow("multiplicity negation"))?;
            out.add(e.clone(), neg)?;
        }
        Ok(out)
    }

    /// Pointwise product.
    pub fn otimes(&self, other: &Self) -> Result<Self> {
        self.check_universe(other)?;
        let mut out = HybridSet::new(self.universe.clone());
        // Only the common support can be nonzero.
        for (e, m) in self.iter() {
            let n = other.multiplicity(e);
            if n != 0 {
                let p = m.checked_mul(n).ok_or(HybridError::Overflow("multiplicity product"))?;
                out.entries.insert(e.clone(), p);
            }
        }
        Ok(out)
    }

    /// The Z action `n · H`.
    pub fn scalar(&self, n: i64) -> Result<Self> {
        let mut out = HybridSet::new(self.universe.clone());
        if n == 0 {
            return Ok(out);
        }
        for (e, m) in self.iter() {
            let p = m.checked_mul(n).ok_or(HybridError::Overflow("scalar multiple"))?;
            out.entries.insert(e.clone(), p);
        }
        Ok(out)
    }

    /// `⊖H`, the group inverse.
    pub fn negate(&self) -> Result<Self> {
        self.scalar(-1)
    }

    pub fn support(&self) -> BTreeSet<E> {
        self.entries.keys().cloned().collect()
    }

    pub fn is_disjoint(&self, other: &Self) -> Result<bool> {
        Ok(self.otimes(other)?.is_empty())
    }

    pub fn is_reducible(&self) -> bool {
        self.entries.values().all(|&m| m == 1)
    }
}

impl<E: Ord + Clone + fmt::Display> HybridSet<E> {
    /// The classical set of members of a reducible hybrid set.
    pub fn reduce(&self) -> Result<BTreeSet<E>> {
        if let Some((e, m)) = self.iter().find(|(_, m)| *m != 1) {
            return Err(HybridError::NotReducible {
                element: e.to_string(),
                multiplicity: m,
            });
        }
        Ok(self.support())
    }
}

impl<E: Ord + fmt::Display> fmt::Display for HybridSet<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (e, m)) in self.entries.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}^{m}")?;
        }
        f.write_str("}")
    }
}

impl HybridSet<Element> {
    /// Parses `{elem^mult, ...}`. Entries may be unsorted and repeated;
    /// a missing `^mult` means multiplicity 1.
    pub fn parse(universe: impl Into<String>, text: &str) -> Result<Self> {
        let mut p = Cursor::new(text);
        p.skip_ws();
        p.expect('{')?;
        let mut entries = Vec::new();
        p.skip_ws();
        if !p.eat('}') {
            loop {
                let e = p.element()?;
                p.skip_ws();
                let m = if p.eat('^') { p.integer()? } else { 1 };
                entries.push((e, m));
                p.skip_ws();
                if p.eat(',') {
                    continue;
                }
                p.expect('}')?;
                break;
            }
        }
        p.skip_ws();
        if !p.at_end() {
            return Err(p.error("trailing input"));
        }
        HybridSet::from_entries(universe, entries)
    }
}

impl FromStr for HybridSet<Element> {
    type Err = HybridError;

    fn from_str(s: &str) -> Result<Self> {
        HybridSet::parse(DEFAULT_UNIVERSE, s)
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn error(&self, msg: &str) -> HybridError {
        HybridError::Parse(format!("{msg} at offset {} in `{}`", self.pos, self.src))
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let text = self.take_while(|c| c == '-' || c == '+' || c.is_ascii_digit());
        text.parse().map_err(|_| self.error("expected integer multiplicity"))
    }

    fn rational(&mut self) -> Result<Rational> {
        self.skip_ws();
        let text = self.take_while(|c| c == '-' || c == '/' || c == '.' || c.is_ascii_digit());
        parse_rational(text).map_err(|_| self.error("expected rational"))
    }

    fn element(&mut self) -> Result<Element> {
        self.skip_ws();
        match self.peek() {
            Some('<') => {
                self.pos += 1;
                let x = self.element()?;
                self.skip_ws();
                self.expect(',')?;
                let v = self.element()?;
                self.skip_ws();
                self.expect('>')?;
                Ok(Element::pair(x, v))
            }
            Some('(') => {
                self.pos += 1;
                let mut coords = vec![self.rational()?];
                self.skip_ws();
                while self.eat(',') {
                    coords.push(self.rational()?);
                    self.skip_ws();
                }
                self.expect(')')?;
                Ok(Element::Point(Point(coords)))
            }
            Some(c) if c.is_ascii_digit() || c == '-' => Ok(Element::scalar(self.rational()?)),
            Some(c) if c.is_alphabetic() || c == '_' => {
                let name = self.take_while(|c| c.is_alphanumeric() || c == '_' || c == '\'');
                Ok(Element::token(name))
            }
            _ => Err(self.error("expected element")),
        }
    }
}
