//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by the analysis library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested quantity is undefined for this parameter shape
    /// (e.g. the log-density has no interior peak when a tail exponent is zero).
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    /// Fewer usable observations than the operation requires.
    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// A numeric routine failed to converge or produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A data file could not be ingested. `row` is 1-based and counts
    /// records, not lines, when the file has a header.
    #[error("ingestion error in {path}{}: {message}", row.map(|r| format!(" (row {r})")).unwrap_or_default())]
    Ingestion {
        path: PathBuf,
        row: Option<u64>,
        message: String,
    },

    /// The caller combined operations or arguments incorrectly.
    #[error("usage error: {0}")]
    Usage(String),

    /// Configuration file problems: unreadable, unparsable or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// Every day in a batch failed; per-day reasons are in the run manifest.
    #[error("batch error: all {total} day(s) failed")]
    BatchAllFailed { total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
