//! Optimizer steps.
//!
//! Plain and exact-line-search gradient descent, damped Newton, and the three
//! AdaGrad variants compared throughout the workspace: the full-matrix
//! version (test scale only, `O(d^3)` per step), the classic diagonal
//! version, and the block-mean version whose preconditioner is an `L x L`
//! eigenproblem over gradient block sums.

mod adagrad;
mod adagrad_bma;
mod steps;

pub use adagrad::{AdaGradDiagState, AdaGradFullState};
pub use adagrad_bma::AdaGradBmaState;
pub use steps::{gd_exact_line_search_step, gd_step, newton_step};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {details}")]
    Dimension { op: &'static str, details: String },
    #[error("invalid optimizer state: {0}")]
    InvalidState(String),
    #[error(transparent)]
    Core(#[from] bma_core::Error),
    #[error(transparent)]
    Dense(#[from] smalldense::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dimension_error(op: &'static str, details: String) -> Error {
    Error::Dimension { op, details }
}

pub(crate) fn check_len(op: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(dimension_error(
            op,
            format!("expected length {expected}, found {found}"),
        ));
    }
    Ok(())
}
