use thiserror::Error;

/// Errors produced by construction and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0} is not prime; the Fourier bound needs the multiplicative structure of Z_n")]
    NotPrime(usize),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("factor sequences are not dual-compatible at position {position}")]
    FactorMismatch { position: usize },

    #[error("invalid permutation of factor positions")]
    InvalidPermutation,

    #[error("basis of the factor map does not match the factor at position {position}")]
    BasisMismatch { position: usize },

    #[error("tensor index does not fit the declared factor at position {position}")]
    InvalidIndex { position: usize },

    #[error("table is not a bijection family: {0}")]
    NotABijection(String),

    #[error("negative value in a norm aggregation")]
    NegativeInput,

    #[error("non-finite value where a finite one is required")]
    NonFinite,

    #[error("block at ({row}, {col}) has inconsistent shape")]
    RaggedBlocks { row: usize, col: usize },

    #[error("map violates the complete-contraction invariant: block norm {norm}")]
    ContractionViolated { norm: f64 },

    #[error("coefficient magnitude {0} exceeds 1")]
    WeightTooLarge(f64),

    #[error("input operator norm {0} exceeds 1; no unitary dilation")]
    NotAContraction(f64),

    #[error("certificate ingredient `{name}` failed: residual {residual} above tolerance {tolerance}")]
    CertificateFailed {
        name: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("tensor is not in constraint-pattern form: {0}")]
    NotAPattern(String),

    #[error("tolerance must be positive")]
    BadTolerance,

    #[error("parse error in sparse coordinate dump at line {line}: {message}")]
    Parse { line: usize, message: String },
}
