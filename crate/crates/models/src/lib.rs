//! Differentiable test problems with analytic gradients, parameter
//! partitioning for block-mean preconditioning, and empirical Fisher
//! information construction.

mod fisher;
mod logreg;
mod mlp;
mod quadratic;

pub use fisher::empirical_fisher;
pub use logreg::LogisticRegressionProblem;
pub use mlp::{partition_for_model, Granularity, MlpModel, ParamKind, ParamLayout, Segment};
pub use quadratic::{QuadraticProblem, Reparameterization};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {details}")]
    Dimension { op: &'static str, details: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix of dimension {dim} exceeds the dense capacity guard ({max})")]
    Capacity { dim: usize, max: usize },
    #[error("matrix is not symmetric: max asymmetry {max_asymmetry:e}")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("matrix is not positive definite: min eigenvalue {min_eigenvalue:e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error(transparent)]
    Dense(#[from] smalldense::Error),
    #[error(transparent)]
    Core(#[from] bma_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dimension_error(op: &'static str, details: String) -> Error {
    Error::Dimension { op, details }
}
