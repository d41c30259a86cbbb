//! Binary operations used to mark joins.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{HybridError, Result};
use crate::point::Rational;

type Combine = fn(&Rational, &Rational) -> Rational;
type Inverse = fn(&Rational) -> Rational;

/// A binary operation `⋆` on scalar values.
///
/// Only associative-commutative operations may mark a join. When an
/// inverse is present, `(S, ⋆)` is treated as an abelian group and
/// negative or repeated occurrences can be folded.
#[derive(Clone)]
pub struct StarOp {
    name: String,
    symbol: String,
    combine: Option<Combine>,
    unit: Option<Rational>,
    inverse: Option<Inverse>,
    assoc_comm: bool,
    idempotent: bool,
}

impl StarOp {
    /// Rational addition, an abelian group with unit 0.
    pub fn add() -> Self {
        StarOp {
            name: "+".into(),
            symbol: "+".into(),
            combine: Some(|a, b| a + b),
            unit: Some(Rational::zero()),
            inverse: Some(|a| -a.clone()),
            assoc_comm: true,
            idempotent: false,
        }
    }

    /// Rational multiplication: a commutative monoid, no inverse.
    pub fn mul() -> Self {
        StarOp {
            name: "*".into(),
            symbol: "*".into(),
            combine: Some(|a, b| a * b),
            unit: Some(Rational::one()),
            inverse: None,
            assoc_comm: true,
            idempotent: false,
        }
    }

    pub fn max() -> Self {
        StarOp {
            name: "max".into(),
            symbol: "max".into(),
            combine: Some(|a, b| a.max(b).clone()),
            unit: None,
            inverse: None,
            assoc_comm: true,
            idempotent: true,
        }
    }

    pub fn min() -> Self {
        StarOp {
            name: "min".into(),
            symbol: "min".into(),
            combine: Some(|a, b| a.min(b).clone()),
            unit: None,
            inverse: None,
            assoc_comm: true,
            idempotent: true,
        }
    }

    /// Spline segment merge. Purely formal: segments are opaque, so there is
    /// no scalar evaluator. Merging a segment with itself gives itself.
    pub fn merge() -> Self {
        StarOp {
            name: "merge".into(),
            symbol: "><".into(),
            combine: None,
            unit: None,
            inverse: None,
            assoc_comm: true,
            idempotent: true,
        }
    }

    /// A user-supplied operation. `assoc_comm` is a declaration the caller
    /// vouches for; joins refuse operations declared otherwise.
    pub fn custom(
        name: impl Into<String>,
        combine: Combine,
        unit: Option<Rational>,
        inverse: Option<Inverse>,
        assoc_comm: bool,
    ) -> Self {
        let name = name.into();
        StarOp {
            symbol: name.clone(),
            name,
            combine: Some(combine),
            unit,
            inverse,
            assoc_comm,
            idempotent: false,
        }
    }

    /// Looks up a built-in operation by name or symbol.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "+" | "add" => Ok(StarOp::add()),
            "*" | "mul" => Ok(StarOp::mul()),
            "max" => Ok(StarOp::max()),
            "min" => Ok(StarOp::min()),
            "merge" | "><" => Ok(StarOp::merge()),
            other => Err(HybridError::Contract(format!("unknown operation `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn unit(&self) -> Option<&Rational> {
        self.unit.as_ref()
    }

    pub fn is_assoc_comm(&self) -> bool {
        self.assoc_comm
    }

    pub fn is_group(&self) -> bool {
        self.inverse.is_some() && self.unit.is_some()
    }

    pub fn is_idempotent(&self) -> bool {
        self.idempotent
    }

    pub fn has_evaluator(&self) -> bool {
        self.combine.is_some()
    }

    pub fn apply(&self, a: &Rational, b: &Rational) -> Result<Rational> {
        let f = self
            .combine
            .ok_or_else(|| HybridError::NonEvaluable(format!("`{}` has no scalar evaluator", self.name)))?;
        Ok(f(a, b))
    }

    pub fn invert(&self, a: &Rational) -> Result<Rational> {
        let inv = self
            .inverse
            .ok_or_else(|| HybridError::NonEvaluable(format!("`{}` has no inverse", self.name)))?;
        Ok(inv(a))
    }

    /// Whether an exponent can be folded by this operation.
    pub fn supports_exponent(&self, k: i64) -> bool {
        match k {
            1 => true,
            k if k > 1 => self.is_group() || self.idempotent,
            0 => self.unit.is_some(),
            _ => self.is_group(),
        }
    }

    /// `k`-fold combination of `a` with itself; negative `k` uses the inverse.
    pub fn power(&self, a: &Rational, k: i64) -> Result<Rational> {
        if !self.supports_exponent(k) {
            return Err(HybridError::NonEvaluable(format!(
                "exponent {k} cannot be folded by `{}`",
                self.name
            )));
        }
        if k == 0 {
            return Ok(self.unit.clone().expect("checked above"));
        }
        if self.idempotent && k > 0 {
            return Ok(a.clone());
        }
        let base = if k < 0 { self.invert(a)? } else { a.clone() };
        let n = k.unsigned_abs();
        match self.name.as_str() {
            "+" => Ok(base * Rational::from_integer(n.into())),
            "*" => Ok(num_traits::pow(base, n as usize)),
            _ => {
                let mut acc = base.clone();
                for _ in 1..n {
                    acc = self.apply(&acc, &base)?;
                }
                Ok(acc)
            }
        }
    }
}

impl fmt::Debug for StarOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StarOp")
            .field("name", &self.name)
            .field("group", &self.is_group())
            .field("assoc_comm", &self.assoc_comm)
            .finish()
    }
}

impl PartialEq for StarOp {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.assoc_comm == other.assoc_comm
            && self.is_group() == other.is_group()
            && self.idempotent == other.idempotent
    }
}

impl Eq for StarOp {}
