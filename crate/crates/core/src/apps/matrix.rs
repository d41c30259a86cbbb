//! Symbolic block matrices with symbolic dimensions.
//!
//! A matrix is a plain join of opaque block symbols over grid rectangles.
//! Adding matrices whose blocks are laid out differently is a pointwise
//! `+` over the canonical refinement of their block partitions, giving
//! `r(b − 1) + 1` terms for `r` matrices of `b` blocks.

use std::fmt;

use crate::calculus::pointwise_star;
use crate::error::{HybridError, Result};
use crate::hybridfn::{eval, Env, EvalOutcome, FunctionAtom, HybridExpr, HybridTerm, StarOp, Value};
use crate::point::{int, Point};
use crate::refine::{canonical_refinement, GeneralisedPartition, Refinement};
use crate::regions::{ParamExpr, RegionAtom, RegionShape, SymbolicHybridSet, Valuation};

/// Name of the complement piece in matrix sums.
pub const COMPLEMENT: &str = "P1";

/// One block: a rectangle of cells carrying an opaque block symbol of the
/// same name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub region: RegionAtom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicBlockMatrix {
    pub name: String,
    pub rows: ParamExpr,
    pub cols: ParamExpr,
    /// Region atom naming the whole `rows × cols` grid.
    pub universe: String,
    pub blocks: Vec<Block>,
}

impl SymbolicBlockMatrix {
    pub fn new(
        name: impl Into<String>,
        rows: ParamExpr,
        cols: ParamExpr,
        universe: impl Into<String>,
        blocks: Vec<Block>,
    ) -> Result<Self> {
        let name = name.into();
        if blocks.is_empty() {
            return Err(HybridError::Contract(format!("matrix `{name}` has no blocks")));
        }
        Ok(SymbolicBlockMatrix {
            name,
            rows,
            cols,
            universe: universe.into(),
            blocks,
        })
    }

    /// `[A, B; C, D]` where `A` is `h × k`: `A` covers rows `1..h` and
    /// columns `1..k`, `B` rows `h+1..n` of those columns, `C` rows `1..h`
    /// of columns `k+1..m`, and `D` the rest.
    pub fn two_by_two(
        name: impl Into<String>,
        dims: (ParamExpr, ParamExpr),
        split: (ParamExpr, ParamExpr),
        universe: impl Into<String>,
        names: [&str; 4],
    ) -> Result<Self> {
        let (n, m) = dims;
        let (h, k) = split;
        let one = ParamExpr::constant(int(1));
        let below = |e: &ParamExpr| ParamExpr {
            param: e.param.clone(),
            offset: &e.offset + int(1),
        };
        let rect = |label: &str, r0: &ParamExpr, r1: &ParamExpr, c0: &ParamExpr, c1: &ParamExpr| Block {
            name: label.to_string(),
            region: RegionAtom::new(label, RegionShape::rect(r0.clone(), r1.clone(), c0.clone(), c1.clone())),
        };
        let blocks = vec![
            rect(names[0], &one, &h, &one, &k),
            rect(names[1], &below(&h), &n, &one, &k),
            rect(names[2], &one, &h, &below(&k), &m),
            rect(names[3], &below(&h), &n, &below(&k), &m),
        ];
        SymbolicBlockMatrix::new(name, n, m, universe, blocks)
    }

    pub fn universe_atom(&self) -> RegionAtom {
        let one = ParamExpr::constant(int(1));
        RegionAtom::new(
            self.universe.clone(),
            RegionShape::rect(one.clone(), self.rows.clone(), one, self.cols.clone()),
        )
    }

    /// Declares the grid, the block regions and the block symbols.
    pub fn register(&self, env: &mut Env) -> Result<()> {
        env.regions.ensure(self.universe_atom())?;
        for b in &self.blocks {
            env.regions.ensure(b.region.clone())?;
            env.atoms.ensure(FunctionAtom::opaque(b.name.clone()))?;
        }
        Ok(())
    }

    /// The blocks as an assumed partition of the grid.
    pub fn partition(&self) -> Result<GeneralisedPartition> {
        GeneralisedPartition::assumed(
            self.name.clone(),
            SymbolicHybridSet::atom(self.universe.clone()),
            self.blocks
                .iter()
                .map(|b| (b.name.clone(), SymbolicHybridSet::atom(b.name.clone())))
                .collect(),
        )
    }

    /// `A^A ⊛ B^B ⊛ ...`.
    pub fn as_expr(&self) -> HybridExpr {
        HybridExpr::join_of(
            self.blocks
                .iter()
                .map(|b| HybridTerm::atom(b.name.clone(), SymbolicHybridSet::atom(b.name.clone())))
                .collect(),
        )
    }

    /// Name of the block containing cell `(i, j)`, if exactly one does.
    pub fn block_at(&self, i: i64, j: i64, v: &Valuation) -> Result<Option<&str>> {
        let p = Point::cell(i, j);
        let mut hit = None;
        for b in &self.blocks {
            if b.region.indicator(&p, v)? == 1 {
                if hit.is_some() {
                    return Ok(None);
                }
                hit = Some(b.name.as_str());
            }
        }
        Ok(hit)
    }
}

/// Sum of several matrices over the canonical refinement of their block
/// partitions. Matrices sharing an identical layout share one partition.
pub fn matrix_sum(ms: &[&SymbolicBlockMatrix]) -> Result<(HybridExpr, Refinement)> {
    let first = ms
        .first()
        .ok_or_else(|| HybridError::Contract("no matrices to add".into()))?;
    for m in &ms[1..] {
        if (&m.rows, &m.cols) != (&first.rows, &first.cols) {
            return Err(HybridError::DimensionMismatch {
                expected: format!("{}x{}", first.rows, first.cols),
                found: format!("{}x{} for `{}`", m.rows, m.cols, m.name),
            });
        }
        if m.universe != first.universe {
            return Err(HybridError::UniverseMismatch {
                left: first.universe.clone(),
                right: m.universe.clone(),
            });
        }
    }
    let mut parts: Vec<GeneralisedPartition> = Vec::new();
    for m in ms {
        let p = m.partition()?;
        if !parts.iter().any(|q| q.pieces == p.pieces) {
            parts.push(p);
        }
    }
    let refinement = canonical_refinement(&parts, COMPLEMENT)?;
    let operands: Vec<HybridExpr> = ms.iter().map(|m| m.as_expr()).collect();
    let sum = pointwise_star(&StarOp::add(), &operands, &refinement)?;
    Ok((sum, refinement))
}

/// `M1 + M2` as a marked join over the canonical refinement.
pub fn matrix_add(m1: &SymbolicBlockMatrix, m2: &SymbolicBlockMatrix) -> Result<(HybridExpr, Refinement)> {
    matrix_sum(&[m1, m2])
}

/// Evaluated cell of a matrix sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellValue {
    /// Surviving block symbols with their exponents, in term order.
    pub blocks: Vec<(String, i64)>,
    /// Multiplicity of every term's region at the cell.
    pub multiplicities: Vec<(SymbolicHybridSet, i64)>,
}

impl CellValue {
    pub fn is_undefined(&self) -> bool {
        self.blocks.is_empty()
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return f.write_str("undefined");
        }
        for (k, (b, e)) in self.blocks.iter().enumerate() {
            match (k, *e) {
                (0, 1) => write!(f, "{b}")?,
                (0, e) => write!(f, "{e}*{b}")?,
                (_, 1) => write!(f, " + {b}")?,
                (_, e) if e < 0 => write!(f, " - {}*{b}", -e)?,
                (_, e) => write!(f, " + {e}*{b}")?,
            }
        }
        Ok(())
    }
}

/// Evaluates a matrix sum at cell `(i, j)`.
pub fn matrix_eval_cell(e: &HybridExpr, env: &Env, i: i64, j: i64, v: &Valuation) -> Result<CellValue> {
    let p = Point::cell(i, j);
    let multiplicities = e
        .terms
        .iter()
        .map(|t| Ok((t.region.clone(), env.regions.multiplicity(&t.region, &p, v)?)))
        .collect::<Result<Vec<_>>>()?;
    let word = match eval(e, env, &p, v)? {
        EvalOutcome::Undefined => None,
        EvalOutcome::Value {
            value: Value::Formal { word, scalar: None, .. },
            multiplicity: 1,
        } => Some(word),
        other => {
            return Err(HybridError::NonEvaluable(format!(
                "cell ({i},{j}) does not reduce to block symbols: {other}"
            )))
        }
    };
    let mut blocks = Vec::new();
    if let Some(word) = word {
        // Order by first appearance in the terms, which follows the operands.
        let mut order: Vec<&str> = Vec::new();
        for t in &e.terms {
            for (a, _) in t.value.exponents() {
                if !order.contains(&a) {
                    order.push(a);
                }
            }
        }
        order.sort_by_key(|a| block_rank(e, a));
        for a in order {
            let k = word.exponent(a);
            if k != 0 {
                blocks.push((a.to_string(), k));
            }
        }
    }
    Ok(CellValue { blocks, multiplicities })
}

/// Position of a block symbol in operand order: terms are grouped by the
/// refinement piece they sit on, so use the index of the term whose region
/// is the block itself, falling back to term order.
fn block_rank(e: &HybridExpr, atom: &str) -> usize {
    e.terms
        .iter()
        .position(|t| t.region == SymbolicHybridSet::atom(atom))
        .unwrap_or_else(|| {
            e.terms
                .iter()
                .position(|t| t.value.exponent(atom) != 0)
                .unwrap_or(usize::MAX)
        })
}

/// Breakdown of a complement piece's multiplicity, e.g.
/// `1 - (0 + 1 + 0 + 1 + 0 + 0) = -1`, with the subtracted pieces in
/// refinement order. `None` unless `piece` is `universe ⊖ ⊕ others`.
pub fn complement_breakdown(
    r: &Refinement,
    piece: usize,
    env: &Env,
    p: &Point,
    v: &Valuation,
) -> Result<Option<String>> {
    let others: Vec<&SymbolicHybridSet> = r
        .pieces
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != piece)
        .map(|(_, q)| &q.region)
        .collect();
    let expected = r
        .universe
        .ominus(&SymbolicHybridSet::combination(others.iter().map(|q| (1, *q)))?)?;
    if expected != r.pieces[piece].region {
        return Ok(None);
    }
    let u = env.regions.multiplicity(&r.universe, p, v)?;
    let parts = others
        .iter()
        .map(|q| env.regions.multiplicity(q, p, v).map(|m| m.to_string()))
        .collect::<Result<Vec<_>>>()?;
    let total = env.regions.multiplicity(&r.pieces[piece].region, p, v)?;
    Ok(Some(format!("{u} - ({}) = {total}", parts.join(" + "))))
}
