//! Block-mean matrices.
//!
//! A `d x d` matrix is represented on a partition of its coordinates into `L`
//! contiguous blocks by two small objects: a per-block diagonal coefficient
//! vector `lambda` (expanded to a block-diagonal matrix with constant
//! diagonals) and an `L x L` matrix `b` of per-block constants (expanded to a
//! matrix of constant rectangular blocks). The sum of the two expansions is
//! the represented matrix.
//!
//! The family is closed under inversion and under principal square roots:
//! both are computed from `L x L` eigenproblems, never touching `d x d`
//! storage, which is the point of the representation — preconditioners over
//! many parameters become cheap as long as the number of blocks stays small.

mod fit;
mod matrix;
mod partition;

pub use fit::{best_fit, frobenius_error, ErrorMode};
pub use matrix::{expand_diag, expand_full, BmaMatrix};
pub use partition::Partition;

pub use smalldense::DenseMatrix;

/// Errors for block-mean construction and arithmetic.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {details}")]
    Dimension { op: &'static str, details: String },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("matrix is not flagged symmetric but the operation requires it (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("diagonal coefficient lambda[{index}] = {value:e} is numerically zero")]
    ZeroLambda { index: usize, value: f64 },
    #[error("block system is singular: eigenvalue {min_eigenvalue:e}")]
    Singular { min_eigenvalue: f64 },
    #[error("matrix is not positive definite: min eigenvalue {min_eigenvalue:e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error(transparent)]
    Dense(#[from] smalldense::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dimension_error(op: &'static str, details: String) -> Error {
    Error::Dimension { op, details }
}

/// Tolerance for the symmetry check applied when a matrix is flagged
/// symmetric at construction.
pub const SYMMETRY_TOL: f64 = 1e-12;
