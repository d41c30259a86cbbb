//! Symbolic splines over symbolic knots, and their merge.
//!
//! A spline on `[c_0, c_n]` is a plain join of opaque segment atoms over
//! the pieces `[c_0, c_1], (c_1, c_2], ..., (c_{n-1}, c_n]`. Merging two
//! segments yields the smallest segment on their overlap: knots
//! `[max(a, a'), min(b, b')]`.

use std::fmt;

use crate::calculus::pointwise_star;
use crate::error::{HybridError, Result};
use crate::hybridfn::{eval, Env, EvalOutcome, FunctionAtom, HybridExpr, HybridTerm, StarOp, Value};
use crate::point::{fmt_rational, Point, Rational};
use crate::refine::{canonical_refinement, GeneralisedPartition, Refinement};
use crate::regions::{ParamExpr, RegionAtom, RegionShape, SymbolicHybridSet, Valuation};

/// Name of the complement piece in spline merges.
pub const COMPLEMENT: &str = "R";

/// An opaque segment between two knots, defined on one partition piece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub atom: String,
    pub lo: ParamExpr,
    pub hi: ParamExpr,
    pub piece: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicSpline {
    pub name: String,
    /// Region atom naming `[c_0, c_n]`.
    pub universe: String,
    pub segments: Vec<Segment>,
}

impl SymbolicSpline {
    pub fn new(name: impl Into<String>, universe: impl Into<String>, segments: Vec<Segment>) -> Result<Self> {
        let name = name.into();
        if segments.is_empty() {
            return Err(HybridError::Contract(format!("spline `{name}` has no segments")));
        }
        for w in segments.windows(2) {
            if w[0].hi != w[1].lo {
                return Err(HybridError::Contract(format!(
                    "segments `{}` and `{}` of `{name}` do not share a knot",
                    w[0].atom, w[1].atom
                )));
            }
        }
        Ok(SymbolicSpline {
            name,
            universe: universe.into(),
            segments,
        })
    }

    /// Spline over the knots `c_0..c_n`, with the given segment atom and
    /// piece names.
    pub fn from_knots(
        name: impl Into<String>,
        universe: impl Into<String>,
        knots: &[ParamExpr],
        atoms: &[&str],
        pieces: &[&str],
    ) -> Result<Self> {
        if knots.len() != atoms.len() + 1 || atoms.len() != pieces.len() {
            return Err(HybridError::DimensionMismatch {
                expected: format!("{} knots and {} piece names", atoms.len() + 1, atoms.len()),
                found: format!("{} knots and {} piece names", knots.len(), pieces.len()),
            });
        }
        let segments = atoms
            .iter()
            .zip(pieces)
            .enumerate()
            .map(|(i, (a, p))| Segment {
                atom: a.to_string(),
                lo: knots[i].clone(),
                hi: knots[i + 1].clone(),
                piece: p.to_string(),
            })
            .collect();
        SymbolicSpline::new(name, universe, segments)
    }

    pub fn knots(&self) -> Vec<&ParamExpr> {
        let mut k: Vec<&ParamExpr> = self.segments.iter().map(|s| &s.lo).collect();
        k.push(&self.segments.last().expect("nonempty").hi);
        k
    }

    pub fn universe_atom(&self) -> RegionAtom {
        let k = self.knots();
        RegionAtom::new(
            self.universe.clone(),
            RegionShape::interval(k[0].clone(), k[k.len() - 1].clone(), true, true),
        )
    }

    /// Region of segment `i`; only the first piece includes its left knot.
    pub fn piece_atom(&self, i: usize) -> RegionAtom {
        let s = &self.segments[i];
        RegionAtom::new(
            s.piece.clone(),
            RegionShape::interval(s.lo.clone(), s.hi.clone(), i == 0, true),
        )
    }

    /// Declares the universe, the pieces and the segment atoms.
    pub fn register(&self, env: &mut Env) -> Result<()> {
        env.regions.ensure(self.universe_atom())?;
        for (i, s) in self.segments.iter().enumerate() {
            env.regions.ensure(self.piece_atom(i))?;
            env.atoms.ensure(FunctionAtom::opaque(s.atom.clone()))?;
        }
        Ok(())
    }

    pub fn partition(&self) -> Result<GeneralisedPartition> {
        GeneralisedPartition::assumed(
            self.name.clone(),
            SymbolicHybridSet::atom(self.universe.clone()),
            self.segments
                .iter()
                .map(|s| (s.piece.clone(), SymbolicHybridSet::atom(s.piece.clone())))
                .collect(),
        )
    }

    pub fn as_expr(&self) -> HybridExpr {
        HybridExpr::join_of(
            self.segments
                .iter()
                .map(|s| HybridTerm::atom(s.atom.clone(), SymbolicHybridSet::atom(s.piece.clone())))
                .collect(),
        )
    }

    pub fn segment(&self, atom: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.atom == atom)
    }
}

/// `S ⋈ T` over the canonical refinement of the two partitions. The term
/// on the complement piece comes last.
pub fn spline_merge(s: &SymbolicSpline, t: &SymbolicSpline) -> Result<(HybridExpr, Refinement)> {
    if s.universe != t.universe || s.universe_atom() != t.universe_atom() {
        return Err(HybridError::UniverseMismatch {
            left: s.universe_atom().shape.to_string(),
            right: t.universe_atom().shape.to_string(),
        });
    }
    let (ps, pt) = (s.partition()?, t.partition()?);
    let parts = if ps.pieces == pt.pieces { vec![ps] } else { vec![ps, pt] };
    let refinement = canonical_refinement(&parts, COMPLEMENT)?;
    let mut merged = pointwise_star(&StarOp::merge(), &[s.as_expr(), t.as_expr()], &refinement)?;
    let complement = refinement
        .pieces
        .iter()
        .find(|p| p.label == COMPLEMENT)
        .map(|p| p.region.clone());
    if let Some(c) = complement {
        if let Some(k) = merged.terms.iter().position(|t| t.region == c) {
            let term = merged.terms.remove(k);
            merged.terms.push(term);
        }
    }
    Ok((merged, refinement))
}

/// A merged segment at a point: the surviving segment atoms and the knot
/// interval they share.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedSegment {
    pub atoms: Vec<String>,
    pub lo: Rational,
    pub hi: Rational,
}

impl MergedSegment {
    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }
}

impl fmt::Display for MergedSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} on [{}, {}]",
            self.atoms.join(" >< "),
            fmt_rational(&self.lo),
            fmt_rational(&self.hi)
        )
    }
}

/// Evaluates a merged spline at `x`. `Ok(None)` outside the universe.
///
/// Surviving atoms must have exponent one. An empty knot interval
/// (`max lo > min hi`) is reported as an inconsistency.
pub fn spline_eval_region(
    e: &HybridExpr,
    env: &Env,
    splines: &[&SymbolicSpline],
    x: &Rational,
    v: &Valuation,
) -> Result<Option<MergedSegment>> {
    let word = match eval(e, env, &Point::scalar(x.clone()), v)? {
        EvalOutcome::Undefined => return Ok(None),
        EvalOutcome::Value {
            value: Value::Formal { word, scalar: None, .. },
            multiplicity: 1,
        } => word,
        other => {
            return Err(HybridError::NonEvaluable(format!(
                "merged spline at {} is not a segment: {other}",
                fmt_rational(x)
            )))
        }
    };
    let mut atoms = Vec::new();
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for (a, k) in word.exponents() {
        if k != 1 {
            return Err(HybridError::Inconsistent(format!(
                "segment `{a}` survives with exponent {k} at {}",
                fmt_rational(x)
            )));
        }
        let seg = splines
            .iter()
            .find_map(|s| s.segment(a))
            .ok_or_else(|| HybridError::UnknownAtom(a.to_string()))?;
        let (l, h) = (seg.lo.eval(v)?, seg.hi.eval(v)?);
        lo = Some(lo.map_or(l.clone(), |c| c.max(l)));
        hi = Some(hi.map_or(h.clone(), |c| c.min(h)));
        atoms.push(a.to_string());
    }
    let (lo, hi) = (lo.expect("nonempty word"), hi.expect("nonempty word"));
    if lo > hi {
        return Err(HybridError::Inconsistent(format!(
            "merge of {} is empty: [{}, {}]",
            atoms.join(" >< "),
            fmt_rational(&lo),
            fmt_rational(&hi)
        )));
    }
    Ok(Some(MergedSegment { atoms, lo, hi }))
}
