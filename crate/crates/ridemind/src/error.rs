//! Error taxonomy shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input value fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model definition is internally inconsistent.
    #[error("model error: {0}")]
    Model(String),

    /// An operation was called in a way its contract forbids.
    #[error("usage error: {0}")]
    Usage(String),

    /// Conditioning left zero probability mass: the supplied evidence is
    /// impossible under the model.
    #[error("degenerate evidence: {0}")]
    DegenerateEvidence(String),

    /// Input data failed validation. Carries every failure found in one pass.
    #[error("validation failed with {} issue(s):\n{}", .0.len(), .0.join("\n"))]
    Validation(Vec<String>),

    /// A statistic is undefined for the given samples.
    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateEvidence(msg.into())
    }

    pub fn undefined(msg: impl Into<String>) -> Self {
        Error::UndefinedStatistic(msg.into())
    }

    /// Process exit status for the CLI: usage errors exit 2, everything
    /// else exits 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            _ => 1,
        }
    }
}
