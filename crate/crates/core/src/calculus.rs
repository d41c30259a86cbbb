//! Arithmetic on hybrid functions over a common refinement, identities for
//! invertible operations, and linear operators with Karr's summation
//! convention.

use std::fmt;

use num_traits::Zero;

use crate::batch;
use crate::error::{HybridError, Result};
use crate::hybridfn::{
    marked_join, term_graph_value, AtomValue, Env, EvalOutcome, FreeWord, FunctionAtom, HybridExpr, HybridTerm, JoinOp,
    StarOp, Value,
};
use crate::point::{fmt_rational, int, Point, Rational};
use crate::refine::{canonical_refinement, GeneralisedPartition, Refinement};
use crate::regions::{SymbolicHybridSet, Valuation};

/// Outcome of a sampled identity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub name: String,
    pub checked: usize,
    pub violations: Vec<String>,
}

impl CheckReport {
    fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            checked: 0,
            violations: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations.push(describe());
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Merges another report's counts and violations into this one.
    pub fn absorb(&mut self, other: CheckReport) {
        self.checked += other.checked;
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "pass" } else { "FAIL" };
        write!(f, "{}: {status} ({} checked", self.name, self.checked)?;
        if !self.passed() {
            write!(f, ", {} violations", self.violations.len())?;
        }
        f.write_str(")")?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

/// Distributes `star` across the pieces of `refinement`.
///
/// Every operand must be a plain join whose term regions all appear in the
/// refinement's rewrite table. The result has one term per refinement
/// piece whose combined word is nonempty: for piece `k` the word is
/// `Σ_t c_k(t) · word_t` over all operand terms `t`, where `c_k(t)` is the
/// coefficient of piece `k` in the rewrite of `t`'s region.
pub fn pointwise_star(star: &StarOp, operands: &[HybridExpr], refinement: &Refinement) -> Result<HybridExpr> {
    let mut words = vec![FreeWord::empty(); refinement.len()];
    for op in operands {
        if op.op != JoinOp::Join {
            return Err(HybridError::Contract(
                "operands of a pointwise operation must be plain joins".into(),
            ));
        }
        for t in &op.terms {
            let rw = refinement.rewrite_for(&t.region).ok_or_else(|| {
                HybridError::Refinement(format!("region {} is not refined by the given refinement", t.region))
            })?;
            for (w, &c) in words.iter_mut().zip(&rw.coeffs) {
                if c != 0 {
                    *w = w.mul(&t.value.pow(c)?)?;
                }
            }
        }
    }
    let terms = words
        .into_iter()
        .zip(&refinement.pieces)
        .filter(|(w, _)| !w.is_empty())
        .map(|(w, p)| HybridTerm::new(w, p.region.clone()))
        .collect();
    marked_join(star.clone(), terms)
}

/// The partition formed by an operand's term regions.
pub fn partition_of(name: &str, e: &HybridExpr, universe: &SymbolicHybridSet) -> Result<GeneralisedPartition> {
    GeneralisedPartition::of_regions(
        name,
        universe.clone(),
        e.terms.iter().map(|t| t.region.clone()).collect(),
    )
}

/// [`pointwise_star`] over the canonical refinement of the operands' own
/// partitions. Operands sharing the same partition contribute it once.
pub fn pointwise_star_canonical(
    star: &StarOp,
    operands: &[HybridExpr],
    universe: &SymbolicHybridSet,
    complement: &str,
) -> Result<(HybridExpr, Refinement)> {
    let mut parts: Vec<GeneralisedPartition> = Vec::new();
    for (k, op) in operands.iter().enumerate() {
        let p = partition_of(&format!("operand{}", k + 1), op, universe)?;
        if !parts.iter().any(|q| q.pieces == p.pieces) {
            parts.push(p);
        }
    }
    let refinement = canonical_refinement(&parts, complement)?;
    Ok((pointwise_star(star, operands, &refinement)?, refinement))
}

/// Checks `(f^P ⋆ f^{⊖P})(x) = (f^P ⋆ (−f)^P)(x) = P(x) · ⟬(x, e)⟭` at
/// every sampled point, where `e` is the unit of the group `star`.
///
/// The first form is evaluated through the term graph of the word
/// `f · f⁻¹`; the second by applying `star` to `f(x)` and its inverse.
pub fn star_inverse_identity_check(
    star: &StarOp,
    f: &HybridTerm,
    env: &Env,
    v: &Valuation,
    sample: &[Point],
) -> Result<CheckReport> {
    if !star.is_group() {
        return Err(HybridError::Contract(format!("`{}` has no inverse", star.name())));
    }
    let unit = star.unit().cloned().expect("groups have a unit");
    let cancelled = f.value.mul(&f.value.pow(-1)?)?;
    let graph_form = marked_join(star.clone(), vec![HybridTerm::new(cancelled, f.region.clone())])?;
    let rows = batch::map(sample, |p| -> Result<(i64, EvalOutcome, Option<Rational>)> {
        let m = env.regions.multiplicity(&f.region, p, v)?;
        let via_graph = term_graph_value(&graph_form, env, p, v)?;
        let direct = if m == 0 {
            None
        } else {
            match fold_numeric(star, &f.value, env, p, v)? {
                Some(fx) => Some(star.apply(&fx, &star.invert(&fx)?)?),
                None => None,
            }
        };
        Ok((m, via_graph, direct))
    });
    let mut report = CheckReport::new(format!("inverse identity for `{}`", star.name()));
    for (p, row) in sample.iter().zip(rows) {
        let (m, via_graph, direct) = row?;
        let expected = if m == 0 {
            EvalOutcome::Undefined
        } else {
            EvalOutcome::Value {
                value: Value::Scalar(unit.clone()),
                multiplicity: m,
            }
        };
        report.record(via_graph == expected, || {
            format!("at {p}: term graph gives {via_graph}, expected {expected}")
        });
        if m != 0 {
            report.record(direct.as_ref() == Some(&unit), || {
                format!("at {p}: f(x) {} (-f)(x) is not the unit", star.symbol())
            });
        }
    }
    Ok(report)
}

/// Value of a word whose atoms all have scalar bodies; `None` if any is
/// undefined at the point.
fn fold_numeric(star: &StarOp, word: &FreeWord, env: &Env, p: &Point, v: &Valuation) -> Result<Option<Rational>> {
    let mut acc = star.unit().cloned();
    for (name, k) in word.exponents() {
        let x = match env.atoms.get(name)?.value_at(p, v)? {
            AtomValue::Scalar(r) => r,
            AtomValue::Undefined => return Ok(None),
            AtomValue::Opaque => return Err(HybridError::OpaqueAtom(name.to_string())),
        };
        let x = star.power(&x, k)?;
        acc = Some(match acc {
            Some(a) => star.apply(&a, &x)?,
            None => x,
        });
    }
    Ok(acc)
}

/// `Σ_{lower ≤ i < upper} summand(i)`, extended to `upper < lower` by
/// `Σ_{m ≤ i < n} = −Σ_{n ≤ i < m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KarrSum {
    pub lower: i64,
    pub upper: i64,
    pub summand: FunctionAtom,
}

impl KarrSum {
    pub fn new(lower: i64, upper: i64, summand: FunctionAtom) -> Self {
        KarrSum { lower, upper, summand }
    }
}

fn at_integer(f: &FunctionAtom, i: i64, v: &Valuation) -> Result<Rational> {
    match f.value_at(&Point::scalar(int(i)), v)? {
        AtomValue::Scalar(r) => Ok(r),
        AtomValue::Undefined => Err(HybridError::NonEvaluable(format!("`{}` is undefined at {i}", f.name))),
        AtomValue::Opaque => Err(HybridError::OpaqueAtom(f.name.clone())),
    }
}

pub fn karr_sum(s: &KarrSum, v: &Valuation) -> Result<Rational> {
    let (lo, hi, sign) = if s.lower <= s.upper {
        (s.lower, s.upper, 1)
    } else {
        (s.upper, s.lower, -1)
    };
    let mut acc = Rational::zero();
    for i in lo..hi {
        acc += at_integer(&s.summand, i, v)?;
    }
    Ok(acc * int(sign))
}

/// Checks, for every assignment of the three bounds to `(ℓ, m, n)`,
/// the split identity `Σ_{ℓ≤i<n} = Σ_{ℓ≤i<m} + Σ_{m≤i<n}` and the
/// telescoping identity `Σ_{m≤i<n} (f(i+1) − f(i)) = f(n) − f(m)`.
pub fn karr_split_check(f: &FunctionAtom, bounds: [i64; 3], v: &Valuation) -> Result<CheckReport> {
    const ORDERINGS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut report = CheckReport::new(format!("Karr identities for `{}`", f.name));
    let sum = |a: i64, b: i64| karr_sum(&KarrSum::new(a, b, f.clone()), v);
    for ord in ORDERINGS {
        let (l, m, n) = (bounds[ord[0]], bounds[ord[1]], bounds[ord[2]]);
        let lhs = sum(l, n)?;
        let rhs = sum(l, m)? + sum(m, n)?;
        report.record(lhs == rhs, || {
            format!(
                "split at (l,m,n)=({l},{m},{n}): {} != {}",
                fmt_rational(&lhs),
                fmt_rational(&rhs)
            )
        });
        let (lo, hi, sign) = if m <= n { (m, n, 1) } else { (n, m, -1) };
        let mut diff = Rational::zero();
        for i in lo..hi {
            diff += at_integer(f, i + 1, v)? - at_integer(f, i, v)?;
        }
        diff *= int(sign);
        let ends = at_integer(f, n, v)? - at_integer(f, m, v)?;
        report.record(diff == ends, || {
            format!(
                "telescoping over ({m},{n}): {} != {}",
                fmt_rational(&diff),
                fmt_rational(&ends)
            )
        });
    }
    Ok(report)
}

/// A linear functional on rational-valued functions of a point.
pub trait LinearOperator: Sync {
    fn name(&self) -> &str;

    /// Applies the operator to `h`; errors from `h` propagate.
    fn apply(&self, h: &(dyn Fn(&Point) -> Result<Rational> + Sync)) -> Result<Rational>;
}

/// `h ↦ Σ_{lo ≤ x ≤ hi} h(x)` over the integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSum {
    lo: i64,
    hi: i64,
    name: String,
}

impl FiniteSum {
    /// Ranges longer than this are refused as effectively unbounded.
    pub const MAX_TERMS: i64 = 1_000_000;

    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if hi.saturating_sub(lo) >= Self::MAX_TERMS {
            return Err(HybridError::Contract(format!(
                "summation over [{lo}, {hi}] exceeds {} terms",
                Self::MAX_TERMS
            )));
        }
        Ok(FiniteSum {
            lo,
            hi,
            name: format!("sum[{lo}..{hi}]"),
        })
    }

    pub fn points(&self) -> Vec<Point> {
        (self.lo..=self.hi).map(|i| Point::scalar(int(i))).collect()
    }
}

impl LinearOperator for FiniteSum {
    fn name(&self) -> &str {
        &self.name
    }

    fn apply(&self, h: &(dyn Fn(&Point) -> Result<Rational> + Sync)) -> Result<Rational> {
        let values = batch::map(&self.points(), |p| h(p));
        let mut acc = Rational::zero();
        for x in values {
            acc += x?;
        }
        Ok(acc)
    }
}

/// `L(f^P) = L(x ↦ P(x) · f(x))`. The term's word must be a single atom
/// with a scalar body; points where `P(x) = 0` contribute nothing even if
/// `f` is undefined there.
pub fn apply_linear(op: &dyn LinearOperator, f: &HybridTerm, env: &Env, v: &Valuation) -> Result<Rational> {
    let mut atoms = f.value.exponents();
    let (name, k) = match (atoms.next(), atoms.next()) {
        (Some((name, 1)), None) => (name, 1),
        _ => {
            return Err(HybridError::Contract(format!(
                "linear operators apply to single-atom terms, not `{}`",
                f.value.render(".")
            )))
        }
    };
    debug_assert_eq!(k, 1);
    let atom = env.atoms.get(name)?;
    let h = |p: &Point| -> Result<Rational> {
        let m = env.regions.multiplicity(&f.region, p, v)?;
        if m == 0 {
            return Ok(Rational::zero());
        }
        match atom.value_at(p, v)? {
            AtomValue::Scalar(r) => Ok(r * int(m)),
            AtomValue::Undefined => Err(HybridError::NonEvaluable(format!("`{name}` is undefined at {p}"))),
            AtomValue::Opaque => Err(HybridError::OpaqueAtom(name.to_string())),
        }
    };
    op.apply(&h)
}

/// Checks `L(f^P) = Σ_i L(f^{P_i})` for a partition `P_1..P_n` of `P`.
pub fn linear_additivity_check(
    op: &dyn LinearOperator,
    atom: &str,
    partition: &GeneralisedPartition,
    env: &Env,
    v: &Valuation,
) -> Result<CheckReport> {
    let whole = apply_linear(op, &HybridTerm::atom(atom, partition.universe.clone()), env, v)?;
    let mut parts = Rational::zero();
    for piece in &partition.pieces {
        parts += apply_linear(op, &HybridTerm::atom(atom, piece.region.clone()), env, v)?;
    }
    let mut report = CheckReport::new(format!("additivity of {} over `{}`", op.name(), partition.name));
    report.record(whole == parts, || {
        format!(
            "L(f^P) = {} but the pieces sum to {}",
            fmt_rational(&whole),
            fmt_rational(&parts)
        )
    });
    Ok(report)
}

/// Self-test for a user-supplied operator: additivity and homogeneity on a
/// few probe functions.
pub fn validate_linear_operator(op: &dyn LinearOperator) -> Result<CheckReport> {
    type Probe = fn(&Point) -> Rational;
    let probes: [(&str, Probe); 3] = [
        ("1", |_| int(1)),
        ("x", |p| p.coords().first().cloned().unwrap_or_else(Rational::zero)),
        ("x^2 - 3", |p| {
            let x = p.coords().first().cloned().unwrap_or_else(Rational::zero);
            &x * &x - int(3)
        }),
    ];
    let mut report = CheckReport::new(format!("linearity of {}", op.name()));
    for (i, (na, a)) in probes.iter().enumerate() {
        for (nb, b) in &probes[i..] {
            let sum = op.apply(&|p| Ok(a(p) + b(p)))?;
            let parts = op.apply(&|p| Ok(a(p)))? + op.apply(&|p| Ok(b(p)))?;
            report.record(sum == parts, || format!("L({na} + {nb}) != L({na}) + L({nb})"));
        }
        let scaled = op.apply(&|p| Ok(a(p) * int(-7)))?;
        let expect = op.apply(&|p| Ok(a(p)))? * int(-7);
        report.record(scaled == expect, || format!("L(-7*{na}) != -7*L({na})"));
    }
    Ok(report)
}
