//! Self-contained dense linear algebra for small matrices.
//!
//! This crate provides the dense kernels the rest of the workspace builds on:
//! a row-major [`DenseMatrix`], a cyclic Jacobi eigensolver for symmetric
//! matrices ([`jacobi_eig`]), eigenvalue-clamped matrix powers
//! ([`clamped_matrix_power`]) and an elimination-based inverse
//! ([`dense_inverse`]). Everything is `f64`; matrices are expected to be
//! small (a few hundred rows at most), so the implementations favor clarity
//! and numerical robustness over BLAS-grade throughput.

mod eig;
mod matrix;
mod solve;

pub use eig::{clamped_matrix_power, jacobi_eig, SymEig};
pub use matrix::DenseMatrix;
pub use solve::dense_inverse;

/// Errors produced by the dense kernels.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {details}")]
    Dimension { op: &'static str, details: String },
    #[error("singular matrix: pivot {pivot:e} at elimination step {index}")]
    Singular { pivot: f64, index: usize },
    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("parse error at line {line}: {details}")]
    Parse { line: usize, details: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dimension_error(op: &'static str, details: String) -> Error {
    Error::Dimension { op, details }
}
