//! Classical piecewise functions over finite, enumerated universes.
//!
//! This is the reference semantics the hybrid machinery is checked
//! against. It deliberately shares no code with it: pieces are plain
//! `BTreeSet`s, evaluation is case analysis, and combining two piecewise
//! functions intersects every pair of pieces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("pieces {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("piece {0} contains points outside the universe")]
    OutsideUniverse(usize),
    #[error("{0} universe points are not covered by any piece")]
    NotCovered(usize),
    #[error("the operands have different universes")]
    UniverseMismatch,
    #[error("incompatible values at {0}")]
    Incompatible(String),
}

pub type PieceFn<P, V> = Arc<dyn Fn(&P) -> Option<V> + Send + Sync>;

/// `f(x) = f_χ(x)(x)` where `χ(x)` is the unique piece containing `x`.
#[derive(Clone)]
pub struct ClassicalPiecewise<P: Ord, V> {
    universe: BTreeSet<P>,
    pieces: Vec<(BTreeSet<P>, PieceFn<P, V>)>,
}

impl<P: Ord + Clone + fmt::Debug, V: Clone> ClassicalPiecewise<P, V> {
    /// Checks exhaustively that the pieces are pairwise disjoint and cover
    /// the universe. A piece function returning `None` means `⊥`.
    pub fn new(universe: BTreeSet<P>, pieces: Vec<(BTreeSet<P>, PieceFn<P, V>)>) -> Result<Self, OracleError> {
        for (i, (s, _)) in pieces.iter().enumerate() {
            if !s.is_subset(&universe) {
                return Err(OracleError::OutsideUniverse(i));
            }
            for (j, (t, _)) in pieces.iter().enumerate().skip(i + 1) {
                if !s.is_disjoint(t) {
                    return Err(OracleError::Overlap(i, j));
                }
            }
        }
        let covered: usize = pieces.iter().map(|(s, _)| s.len()).sum();
        if covered != universe.len() {
            return Err(OracleError::NotCovered(universe.len() - covered));
        }
        Ok(ClassicalPiecewise { universe, pieces })
    }

    /// A single total function.
    pub fn single(universe: BTreeSet<P>, f: PieceFn<P, V>) -> Self {
        ClassicalPiecewise {
            pieces: vec![(universe.clone(), f)],
            universe,
        }
    }

    pub fn universe(&self) -> &BTreeSet<P> {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn piece(&self, i: usize) -> &BTreeSet<P> {
        &self.pieces[i].0
    }

    /// Index of the piece containing `x`.
    pub fn chi(&self, x: &P) -> Option<usize> {
        self.pieces.iter().position(|(s, _)| s.contains(x))
    }

    /// Value at `x`; `None` outside the universe or where undefined.
    pub fn eval(&self, x: &P) -> Option<V> {
        self.chi(x).and_then(|i| (self.pieces[i].1)(x))
    }

    /// Whole function as a map, omitting undefined points.
    pub fn table(&self) -> BTreeMap<P, V> {
        self.universe
            .iter()
            .filter_map(|x| self.eval(x).map(|v| (x.clone(), v)))
            .collect()
    }
}

impl<P: Ord + fmt::Debug, V> fmt::Debug for ClassicalPiecewise<P, V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClassicalPiecewise")
            .field("universe", &self.universe.len())
            .field("pieces", &self.pieces.iter().map(|(s, _)| s.len()).collect::<Vec<_>>())
            .finish()
    }
}

pub fn classical_eval<P: Ord + Clone + fmt::Debug, V: Clone>(f: &ClassicalPiecewise<P, V>, x: &P) -> Option<V> {
    f.eval(x)
}

/// Pointwise `f ⋆ g` on the mutual refinement of the two partitions.
///
/// Also returns how many piece intersections were examined.
pub fn classical_star<P, V, F>(
    f: &ClassicalPiecewise<P, V>,
    g: &ClassicalPiecewise<P, V>,
    op: F,
) -> Result<(ClassicalPiecewise<P, V>, usize), OracleError>
where
    P: Ord + Clone + fmt::Debug + Send + Sync + 'static,
    V: Clone + Send + Sync + 'static,
    F: Fn(&V, &V) -> V + Send + Sync + 'static,
{
    classical_star_all(&[f.clone(), g.clone()], op)
}

/// `f_1 ⋆ ... ⋆ f_r` by intersecting every combination of pieces, one
/// from each operand. That is `Π n_i` intersections.
pub fn classical_star_all<P, V, F>(
    fs: &[ClassicalPiecewise<P, V>],
    op: F,
) -> Result<(ClassicalPiecewise<P, V>, usize), OracleError>
where
    P: Ord + Clone + fmt::Debug + Send + Sync + 'static,
    V: Clone + Send + Sync + 'static,
    F: Fn(&V, &V) -> V + Send + Sync + 'static,
{
    let Some(first) = fs.first() else {
        return Ok((
            ClassicalPiecewise {
                universe: BTreeSet::new(),
                pieces: Vec::new(),
            },
            0,
        ));
    };
    if fs.iter().any(|f| f.universe != first.universe) {
        return Err(OracleError::UniverseMismatch);
    }
    let op = Arc::new(op);
    let mut examined = 0usize;
    let mut pieces: Vec<(BTreeSet<P>, PieceFn<P, V>)> = Vec::new();
    let mut idx = vec![0usize; fs.len()];
    // prefix[k] is the intersection of the chosen pieces of fs[0..=k]; only
    // the levels at and after the last odometer change are recomputed.
    let mut prefix: Vec<BTreeSet<P>> = Vec::with_capacity(fs.len());
    let mut stale = 0usize;
    loop {
        examined += 1;
        prefix.truncate(stale);
        for k in stale..fs.len() {
            let piece = &fs[k].pieces[idx[k]].0;
            let next = match prefix.last() {
                None => piece.clone(),
                Some(acc) => acc.intersection(piece).cloned().collect(),
            };
            prefix.push(next);
        }
        let cell = prefix.last().expect("at least one operand").clone();
        if !cell.is_empty() {
            let parts: Vec<PieceFn<P, V>> = fs.iter().zip(&idx).map(|(f, &i)| f.pieces[i].1.clone()).collect();
            let op = op.clone();
            let h: PieceFn<P, V> = Arc::new(move |x| {
                let mut acc = parts[0](x)?;
                for p in &parts[1..] {
                    acc = op(&acc, &p(x)?);
                }
                Some(acc)
            });
            pieces.push((cell, h));
        }
        // Odometer over the piece indices.
        let mut k = fs.len();
        loop {
            if k == 0 {
                let out = ClassicalPiecewise::new(first.universe.clone(), pieces)?;
                return Ok((out, examined));
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < fs[k].pieces.len() {
                stale = k;
                break;
            }
            idx[k] = 0;
        }
    }
}

/// `f^A` in the classical sense: `f` on `A`, undefined elsewhere.
pub fn restrict<P, V, F>(f: F, a: &BTreeSet<P>) -> BTreeMap<P, V>
where
    P: Ord + Clone,
    F: Fn(&P) -> Option<V>,
{
    a.iter().filter_map(|x| f(x).map(|v| (x.clone(), v))).collect()
}

/// Classical join: union of partial functions, defined only where all
/// operands that are defined agree.
pub fn classical_join<P, V>(parts: &[BTreeMap<P, V>]) -> Result<BTreeMap<P, V>, OracleError>
where
    P: Ord + Clone + fmt::Debug,
    V: Clone + PartialEq,
{
    let mut out: BTreeMap<P, V> = BTreeMap::new();
    for part in parts {
        for (x, v) in part {
            match out.get(x) {
                Some(w) if w != v => return Err(OracleError::Incompatible(format!("{x:?}"))),
                Some(_) => {}
                None => {
                    out.insert(x.clone(), v.clone());
                }
            }
        }
    }
    Ok(out)
}
