//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors reported by ingestion, analysis and pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    /// Required CSV column is absent from the header.
    #[error("missing required column `{0}`")]
    MissingColumn(String),

    /// CSV header contains a column outside the documented schema.
    #[error("unexpected column `{0}`")]
    UnexpectedColumn(String),

    /// A data row failed to parse or violated an invariant.
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    /// Clinical metadata listed the same patient twice.
    #[error("duplicate patient id `{0}`")]
    DuplicatePatient(String),

    /// Clinical record failed validation.
    #[error("invalid clinical record: {0}")]
    InvalidClinical(String),

    /// Clinical JSON failed to parse; position comes from the decoder.
    #[error("invalid clinical json: {0}")]
    Json(#[from] serde_json::Error),

    /// Channel label was empty after normalization.
    #[error("empty channel label")]
    EmptyChannelLabel,

    /// LOF needs at least two points.
    #[error("insufficient points: need at least 2, got {0}")]
    InsufficientPoints(usize),

    /// Neighbor count outside `1..=n-1`.
    #[error("invalid neighbor count {k} for {n} points")]
    InvalidNeighborCount { k: usize, n: usize },

    /// Configuration value outside its documented range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Grouping feature not present in the clinical records.
    #[error("unknown clinical feature `{requested}`; available: {}", available.join(", "))]
    UnknownFeature {
        requested: String,
        available: Vec<String>,
    },

    /// A concordance report references a patient missing from the clinical records.
    #[error("patient `{0}` has no clinical record")]
    UnknownPatient(String),

    /// File could not be read.
    #[error("cannot read {path}: {source}")]
    ReadFile {
        path: PathBuf,
        source: std::io::Error,
    },

    /// File could not be written.
    #[error("cannot write {path}: {source}")]
    WriteFile {
        path: PathBuf,
        source: std::io::Error,
    },

    /// No patients survived ingestion.
    #[error("empty cohort: no patients in input")]
    EmptyCohort,

    /// CSV-level decoding failure.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to.
    ///
    /// 1 = input error, 2 = empty cohort.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EmptyCohort => 2,
            _ => 1,
        }
    }
}
