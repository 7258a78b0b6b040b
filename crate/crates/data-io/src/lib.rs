//! Dataset ingestion and experiment persistence: big-endian IDX image/label
//! files, seeded synthetic Gaussian blob classification data, and the CSV
//! training-log format used by the experiment harness.

mod dataset;
pub mod idx;
mod log;
mod synth;

pub use dataset::Dataset;
pub use idx::load_idx;
pub use log::{read_csv, write_csv, StepRecord, TrainLog};
pub use synth::synth_blobs;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("format error in {field} at byte offset {offset}: {details}")]
    Format {
        field: &'static str,
        offset: u64,
        details: String,
    },
    #[error("parse error at line {line}: {details}")]
    Parse { line: usize, details: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
