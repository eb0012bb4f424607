use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian: |A[{row}][{col}] - conj(A[{col}][{row}])| = {defect:e}")]
    NotHermitian { row: usize, col: usize, defect: f64 },

    #[error("matrix must be non-empty")]
    Empty,

    #[error("eigensolver did not converge within {iterations} iterations")]
    EigenNonConvergence { iterations: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("A(x) is numerically zero (norm {norm:e}); the extreme-eigenvalue structure is degenerate")]
    DegenerateZero { norm: f64 },

    #[error("vector is not a unit vector: norm^2 = {norm_sq}")]
    NotUnitVector { norm_sq: f64 },

    #[error("closed polygon impossible: side {index} has length {length} > 1/2")]
    PolygonInfeasible { index: usize, length: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("witness matrix X must be nonzero")]
    ZeroWitness,
}

pub type Result<T> = std::result::Result<T, Error>;
