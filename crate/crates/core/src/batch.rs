//! Batch evaluation over many sample points.
//!
//! With the `parallel` feature (on by default) the per-point work is spread
//! over the rayon thread pool; without it the same functions run
//! sequentially. Results always come back in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::Result;
use crate::hybridfn::{eval, Env, EvalOutcome, HybridExpr};
use crate::point::Point;
use crate::regions::Valuation;

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Evaluates `e` at every point.
pub fn eval_points(e: &HybridExpr, env: &Env, points: &[Point], v: &Valuation) -> Vec<Result<EvalOutcome>> {
    map(points, |p| eval(e, env, p, v))
}

/// Single-threaded variant of [`eval_points`], kept for comparison.
pub fn eval_points_sequential(e: &HybridExpr, env: &Env, points: &[Point], v: &Valuation) -> Vec<Result<EvalOutcome>> {
    map_sequential(points, |p| eval(e, env, p, v))
}

/// True when the crate was built with rayon support.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
