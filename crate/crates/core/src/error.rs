use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum CosetError {
    #[error("invalid block spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix has no block spec attached")]
    MissingSpec,

    #[error("unknown block name `{0}`")]
    UnknownBlock(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("tail size N = {n_tail} is smaller than k = {k}; the J_N swap needs N >= k")]
    TailTooShort { k: usize, n_tail: usize },

    #[error("operation not defined for family {0}")]
    FamilyMismatch(String),

    #[error("matrix is not an exact permutation")]
    NotPermutation,

    #[error("grid point {index} (z = {z}) lies within {tol:e} of the spectrum of d")]
    SingularPoint { index: usize, z: String, tol: f64 },

    #[error("enumeration of {size}! elements exceeds budget {budget}")]
    BudgetExceeded { size: usize, budget: u64 },

    #[error("distance witness failed re-verification: {0}")]
    Verification(String),

    #[error("rational arithmetic overflow")]
    Overflow,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T, E = CosetError> = std::result::Result<T, E>;
