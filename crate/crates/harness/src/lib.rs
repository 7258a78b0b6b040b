//! Experiment harness: problem construction, optimizer training loops over a
//! learning-rate grid, Fisher analysis dumps and the self-test suite backing
//! the `bma` command-line tool.

pub mod config;
pub mod fisher;
pub mod problems;
pub mod runner;
pub mod selftest;

pub use config::{
    FisherConfig, FisherGranularity, InitKind, LossLog, OptimizerKind, ProblemKind, RunConfig,
};
pub use fisher::{run_fisher_analysis, FisherReport};
pub use runner::{run_experiment, CellResult, RunSummary};
pub use selftest::{run_selftest, SelftestReport};

/// Harness errors map directly onto process exit codes: usage errors exit
/// with 1, data errors with 2.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Data(format!("io: {e}"))
    }
}

impl From<data_io::Error> for Error {
    fn from(e: data_io::Error) -> Self {
        Error::Data(e.to_string())
    }
}

impl From<models::Error> for Error {
    fn from(e: models::Error) -> Self {
        Error::Data(e.to_string())
    }
}

impl From<optim::Error> for Error {
    fn from(e: optim::Error) -> Self {
        Error::Data(e.to_string())
    }
}

impl From<bma_core::Error> for Error {
    fn from(e: bma_core::Error) -> Self {
        Error::Data(e.to_string())
    }
}

impl From<smalldense::Error> for Error {
    fn from(e: smalldense::Error) -> Self {
        Error::Data(e.to_string())
    }
}
