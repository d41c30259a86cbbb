//! Generalised partitions and their common refinements.
//!
//! Given partitions `A_1..A_n`, `B_1..B_m`, ... of a universe `U`, the
//! pieces `P` of a common refinement are obtained by solving
//! `C · P = (U, A_1..A_{n-1}, B_1..B_{m-1}, ...)` for a unimodular integer
//! choice matrix `C` whose first row is all ones. The last piece of every
//! partition is implied by the others and is recovered from
//! `A_n = U ⊖ ⊕_{i<n} A_i`.

mod matrix;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use matrix::{integer_inverse, ChoiceMatrix, ChoiceStyle};

use crate::batch;
use crate::error::{HybridError, Result};
use crate::point::Point;
use crate::regions::{RegionTable, SymbolicHybridSet, Valuation};

/// `Σ n_i + 1 − r` for `r` partitions of sizes `n_i`.
pub fn min_refinement_size(sizes: &[usize]) -> Result<usize> {
    if sizes.is_empty() {
        return Err(HybridError::Contract("at least one partition is required".into()));
    }
    if sizes.contains(&0) {
        return Err(HybridError::Contract("every partition needs at least one piece".into()));
    }
    Ok(sizes.iter().sum::<usize>() + 1 - sizes.len())
}

/// Canonical choice matrix for partitions of the given sizes.
pub fn canonical_choice_matrix(sizes: &[usize], style: ChoiceStyle) -> Result<ChoiceMatrix> {
    let c = ChoiceMatrix::canonical(min_refinement_size(sizes)?, style);
    debug_assert_eq!(c.determinant(), num_bigint::BigInt::from(1));
    Ok(c)
}

/// A labelled piece of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPiece {
    pub label: String,
    pub region: SymbolicHybridSet,
}

/// Pieces whose ⊕-sum is the universe.
///
/// The sum either holds formally (as coefficient vectors), or the partition
/// is flagged `assumed` and only holds for admissible valuations; such
/// partitions should be checked with [`GeneralisedPartition::holds_on`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralisedPartition {
    pub name: String,
    pub universe: SymbolicHybridSet,
    pub pieces: Vec<PartitionPiece>,
    pub assumed: bool,
}

impl GeneralisedPartition {
    /// Partition whose pieces must formally sum to `universe`.
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        universe: SymbolicHybridSet,
        pieces: Vec<(S, SymbolicHybridSet)>,
    ) -> Result<Self> {
        let p = GeneralisedPartition::build(name.into(), universe, pieces, false)?;
        if !p.is_formal()? {
            return Err(HybridError::Contract(format!(
                "pieces of `{}` do not sum to {}; declare the partition as assumed",
                p.name, p.universe
            )));
        }
        Ok(p)
    }

    /// Partition that holds only semantically.
    pub fn assumed<S: Into<String>>(
        name: impl Into<String>,
        universe: SymbolicHybridSet,
        pieces: Vec<(S, SymbolicHybridSet)>,
    ) -> Result<Self> {
        GeneralisedPartition::build(name.into(), universe, pieces, true)
    }

    /// Pieces labelled by their own rendering.
    pub fn of_regions(
        name: impl Into<String>,
        universe: SymbolicHybridSet,
        regions: Vec<SymbolicHybridSet>,
    ) -> Result<Self> {
        let pieces: Vec<(String, SymbolicHybridSet)> = regions.into_iter().map(|r| (r.to_string(), r)).collect();
        let name = name.into();
        let formal = GeneralisedPartition::build(name.clone(), universe.clone(), pieces.clone(), false)?;
        if formal.is_formal()? {
            Ok(formal)
        } else {
            GeneralisedPartition::assumed(name, universe, pieces)
        }
    }

    fn build<S: Into<String>>(
        name: String,
        universe: SymbolicHybridSet,
        pieces: Vec<(S, SymbolicHybridSet)>,
        assumed: bool,
    ) -> Result<Self> {
        if pieces.is_empty() {
            return Err(HybridError::Contract(format!("partition `{name}` has no pieces")));
        }
        let pieces: Vec<PartitionPiece> = pieces
            .into_iter()
            .map(|(label, region)| PartitionPiece {
                label: label.into(),
                region,
            })
            .collect();
        let mut seen = BTreeSet::new();
        for p in &pieces {
            if !seen.insert(&p.label) {
                return Err(HybridError::Contract(format!(
                    "duplicate piece `{}` in `{name}`",
                    p.label
                )));
            }
        }
        Ok(GeneralisedPartition {
            name,
            universe,
            pieces,
            assumed,
        })
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// True when the pieces sum to the universe as coefficient vectors.
    pub fn is_formal(&self) -> Result<bool> {
        let sum = SymbolicHybridSet::combination(self.pieces.iter().map(|p| (1, &p.region)))?;
        Ok(sum == self.universe)
    }

    /// Checks `Σ pieces = universe` pointwise on the sample.
    pub fn holds_on(&self, regions: &RegionTable, v: &Valuation, sample: &[Point]) -> Result<bool> {
        let rows = batch::map(sample, |p| -> Result<bool> {
            let mut sum = 0i64;
            for piece in &self.pieces {
                sum += regions.multiplicity(&piece.region, p, v)?;
            }
            Ok(sum == regions.multiplicity(&self.universe, p, v)?)
        });
        for r in rows {
            if !r? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// How one original piece is rebuilt from refinement pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewrite {
    /// Index of the partition the piece comes from.
    pub partition: usize,
    pub label: String,
    pub region: SymbolicHybridSet,
    /// One coefficient per refinement piece.
    pub coeffs: Vec<i64>,
}

/// Refinement pieces together with the rewrite of every original piece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement {
    pub universe: SymbolicHybridSet,
    pub pieces: Vec<PartitionPiece>,
    pub rewrite: Vec<Rewrite>,
}

impl Refinement {
    /// A refinement given explicitly, e.g. one not produced by a matrix.
    pub fn new(universe: SymbolicHybridSet, pieces: Vec<PartitionPiece>, rewrite: Vec<Rewrite>) -> Result<Self> {
        if let Some(bad) = rewrite.iter().find(|r| r.coeffs.len() != pieces.len()) {
            return Err(HybridError::DimensionMismatch {
                expected: format!("{} coefficients", pieces.len()),
                found: format!("{} for `{}`", bad.coeffs.len(), bad.label),
            });
        }
        Ok(Refinement {
            universe,
            pieces,
            rewrite,
        })
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Rewrite entry for an original piece, matched by region.
    pub fn rewrite_for(&self, region: &SymbolicHybridSet) -> Option<&Rewrite> {
        self.rewrite.iter().find(|r| &r.region == region)
    }

    /// Region (over region atoms) of a combination of refinement pieces.
    pub fn expand(&self, coeffs: &[i64]) -> Result<SymbolicHybridSet> {
        SymbolicHybridSet::combination(coeffs.iter().zip(&self.pieces).map(|(&c, p)| (c, &p.region)))
    }

    /// Combination of refinement pieces written with piece labels, e.g.
    /// `P1 + A2 + B2 + C2`.
    pub fn render_coeffs(&self, coeffs: &[i64]) -> String {
        let mut out = String::new();
        for (&c, p) in coeffs.iter().zip(&self.pieces).filter(|(c, _)| **c != 0) {
            let sign = if c < 0 { "-" } else { "+" };
            if out.is_empty() {
                if c < 0 {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            if c.unsigned_abs() != 1 {
                out.push_str(&format!("{}*", c.unsigned_abs()));
            }
            out.push_str(&p.label);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// Piece labels with the regions they abbreviate.
    pub fn aliases(&self) -> BTreeMap<SymbolicHybridSet, String> {
        self.pieces
            .iter()
            .filter(|p| p.region.terms().count() > 1 || p.region.terms().any(|(a, c)| c != 1 || a != p.label))
            .map(|p| (p.region.clone(), p.label.clone()))
            .collect()
    }
}

impl fmt::Display for Refinement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pieces ({}):", self.pieces.len())?;
        for p in &self.pieces {
            if p.region.to_string() == p.label {
                writeln!(f, "  {}", p.label)?;
            } else {
                writeln!(f, "  {} := {}", p.label, p.region)?;
            }
        }
        writeln!(f, "rewrite:")?;
        for r in &self.rewrite {
            writeln!(f, "  {} = {}", r.label, self.render_coeffs(&r.coeffs))?;
        }
        Ok(())
    }
}

/// Solves `C · P = (U, kept pieces...)` for the refinement pieces `P`.
///
/// Pieces equal to a single kept original piece take its label; the others
/// are named after `complement` (`R`, or `R1`, `R2`, ... if several).
pub fn common_strict_refinement(
    parts: &[GeneralisedPartition],
    c: &ChoiceMatrix,
    complement: &str,
) -> Result<Refinement> {
    let sizes: Vec<usize> = parts.iter().map(GeneralisedPartition::len).collect();
    let dim = min_refinement_size(&sizes)?;
    if c.dim() != dim {
        return Err(HybridError::DimensionMismatch {
            expected: format!("{dim}x{dim} choice matrix"),
            found: format!("{0}x{0}", c.dim()),
        });
    }
    if c.row(0).iter().any(|&x| x != 1) {
        return Err(HybridError::Contract(
            "first row of a choice matrix must be all ones".into(),
        ));
    }
    let universe = parts[0].universe.clone();
    if let Some(p) = parts.iter().find(|p| p.universe != universe) {
        return Err(HybridError::UniverseMismatch {
            left: universe.to_string(),
            right: p.universe.to_string(),
        });
    }
    let inv = c.inverse()?;

    // Targets in row order, with (partition, piece index) for kept pieces.
    let mut targets: Vec<(&str, &SymbolicHybridSet)> = vec![("", &universe)];
    let mut rows_of: Vec<Vec<usize>> = Vec::new();
    for part in parts {
        let mut rows = Vec::new();
        for piece in &part.pieces[..part.len() - 1] {
            rows.push(targets.len());
            targets.push((&piece.label, &piece.region));
        }
        rows_of.push(rows);
    }

    let mut pieces: Vec<PartitionPiece> = Vec::with_capacity(dim);
    let mut fresh: Vec<usize> = Vec::new();
    for j in 0..dim {
        let row = inv.row(j);
        let region = SymbolicHybridSet::combination(row.iter().zip(&targets).map(|(&k, (_, t))| (k, *t)))?;
        let unit = row.iter().filter(|&&k| k != 0).count() == 1;
        let label = match row.iter().position(|&k| k == 1) {
            Some(k) if unit && k > 0 => targets[k].0.to_string(),
            _ => {
                fresh.push(j);
                String::new()
            }
        };
        pieces.push(PartitionPiece { label, region });
    }
    for (n, &j) in fresh.iter().enumerate() {
        pieces[j].label = if fresh.len() == 1 {
            complement.to_string()
        } else {
            format!("{complement}{}", n + 1)
        };
    }
    let mut seen = BTreeSet::new();
    for p in &pieces {
        if !seen.insert(p.label.as_str()) {
            return Err(HybridError::Refinement(format!(
                "refinement piece name `{}` is ambiguous; choose another complement name",
                p.label
            )));
        }
    }

    let mut rewrite = Vec::new();
    for (k, part) in parts.iter().enumerate() {
        let mut rest: Vec<i64> = c.row(0).to_vec();
        for (piece, &row) in part.pieces.iter().zip(&rows_of[k]) {
            let coeffs = c.row(row).to_vec();
            for (r, x) in rest.iter_mut().zip(&coeffs) {
                *r = r.checked_sub(*x).ok_or(HybridError::Overflow("rewrite coefficients"))?;
            }
            rewrite.push(Rewrite {
                partition: k,
                label: piece.label.clone(),
                region: piece.region.clone(),
                coeffs,
            });
        }
        let last = part.pieces.last().expect("partitions are nonempty");
        rewrite.push(Rewrite {
            partition: k,
            label: last.label.clone(),
            region: last.region.clone(),
            coeffs: rest,
        });
    }
    Refinement::new(universe, pieces, rewrite)
}

/// Refinement from the canonical top-row choice matrix: the kept pieces
/// themselves plus the complement `U ⊖ ⊕ kept`, which comes first.
pub fn canonical_refinement(parts: &[GeneralisedPartition], complement: &str) -> Result<Refinement> {
    let sizes: Vec<usize> = parts.iter().map(GeneralisedPartition::len).collect();
    let c = canonical_choice_matrix(&sizes, ChoiceStyle::OnesOnTopRow)?;
    common_strict_refinement(parts, &c, complement)
}

fn rewrite_entries<'a>(r: &'a Refinement, partition: &GeneralisedPartition) -> Result<Vec<&'a Rewrite>> {
    partition
        .pieces
        .iter()
        .map(|p| {
            r.rewrite_for(&p.region)
                .ok_or_else(|| HybridError::Refinement(format!("no rewrite for piece `{}` ({})", p.label, p.region)))
        })
        .collect()
}

/// Every piece's rewrite reproduces its multiplicity at every sampled point.
pub fn is_refinement(
    r: &Refinement,
    partition: &GeneralisedPartition,
    regions: &RegionTable,
    v: &Valuation,
    sample: &[Point],
) -> Result<bool> {
    for (piece, rw) in partition.pieces.iter().zip(rewrite_entries(r, partition)?) {
        let expanded = r.expand(&rw.coeffs)?;
        let ok = batch::map(sample, |p| -> Result<bool> {
            Ok(regions.multiplicity(&expanded, p, v)? == regions.multiplicity(&piece.region, p, v)?)
        });
        for o in ok {
            if !o? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Strictness on the sample: for each original piece, the union of the
/// supports of the refinement pieces used to rebuild it equals the piece's
/// own support.
pub fn is_strict(
    r: &Refinement,
    partition: &GeneralisedPartition,
    regions: &RegionTable,
    v: &Valuation,
    sample: &[Point],
) -> Result<bool> {
    for (piece, rw) in partition.pieces.iter().zip(rewrite_entries(r, partition)?) {
        let used: Vec<&SymbolicHybridSet> = rw
            .coeffs
            .iter()
            .zip(&r.pieces)
            .filter(|(c, _)| **c != 0)
            .map(|(_, p)| &p.region)
            .collect();
        let ok = batch::map(sample, |p| -> Result<bool> {
            let mut in_used = false;
            for u in &used {
                if regions.multiplicity(u, p, v)? != 0 {
                    in_used = true;
                    break;
                }
            }
            Ok(in_used == (regions.multiplicity(&piece.region, p, v)? != 0))
        });
        for o in ok {
            if !o? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
