//! Crate-wide error type.

use std::path::PathBuf;

/// Errors shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violates a documented precondition (non-finite entries,
    /// dimension mismatch, out-of-range hyperparameter, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A column partition does not match the matrix it is applied to.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// A data source holds fewer rows than requested.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A binary or text payload does not match its declared format.
    #[error("format error: {0}")]
    Format(String),

    /// The matrix has no singular value above the rank cutoff.
    #[error("matrix has no nonzero singular value above the cutoff")]
    NoNonzeroSingularValue,

    /// An experiment plan fails validation before any compute starts.
    #[error("validation error: {0}")]
    Validation(String),

    /// File system failure, tagged with the offending path.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Tags an I/O error with the path it concerns.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
