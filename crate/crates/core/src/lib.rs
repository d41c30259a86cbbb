//! Hybrid sets, generalised partitions and hybrid functions.
//!
//! Hybrid sets generalise sets by allowing any integer multiplicity. Using
//! them as the domains of functions lets a piecewise function over
//! symbolically bounded regions be written as one closed-form expression,
//! and lets two such functions be combined over a common refinement whose
//! size grows linearly rather than exponentially in the number of pieces.

pub mod apps;
pub mod batch;
pub mod calculus;

pub mod error;
pub mod hybridfn;
pub mod oracle;

pub mod point;
pub mod refine;

pub mod regions;
pub mod zmodule;

pub use error::{HybridError, Result};
pub use hybridfn::{
    eval, join, marked_join, reduce_formally, AtomTable, Env, EvalOutcome, FreeWord, FunctionAtom, HybridExpr,
    HybridTerm, JoinOp, ScalarExpr, StarOp, Value,
};
pub use point::{Point, Rational};
pub use regions::{ParamExpr, RegionAtom, RegionShape, RegionTable, SymbolicHybridSet, Valuation};
pub use zmodule::{Element, HybridSet};
