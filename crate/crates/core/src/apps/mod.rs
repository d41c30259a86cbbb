//! Worked applications: symbolic block-matrix addition and symbolic
//! spline merging.

pub mod matrix;
pub mod spline;

pub use matrix::{
    complement_breakdown, matrix_add, matrix_eval_cell, matrix_sum, Block, CellValue, SymbolicBlockMatrix,
};
pub use spline::{spline_eval_region, spline_merge, MergedSegment, Segment, SymbolicSpline};
