use thiserror::Error;

/// Errors raised by the hybrid set machinery.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HybridError {
    #[error("universe mismatch: `{left}` vs `{right}`")]
    UniverseMismatch { left: String, right: String },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("hybrid set is not reducible: `{element}` has multiplicity {multiplicity}")]
    NotReducible { element: String, multiplicity: i64 },

    #[error("valuation does not bind parameter `{0}`")]
    MissingParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("choice matrix is not unimodular (determinant {determinant})")]
    NotUnimodular { determinant: String },

    #[error("unknown region atom `{0}`")]
    UnknownRegion(String),

    #[error("unknown function atom `{0}`")]
    UnknownAtom(String),

    #[error("function atom `{0}` is opaque and has no body to evaluate")]
    OpaqueAtom(String),

    #[error("expression is not evaluable here: {0}")]
    NonEvaluable(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("refinement error: {0}")]
    Refinement(String),

    #[error("inconsistent result: {0}")]
    Inconsistent(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = HybridError> = std::result::Result<T, E>;
