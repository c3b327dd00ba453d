//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by frame construction, estimation and the simulation
/// harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A `(j, k)` index does not exist in the frame or coefficient set.
    #[error("index out of range: {0}")]
    Index(String),

    /// Coefficients and frame disagree on the level/center layout.
    #[error("index layout mismatch: {0}")]
    Mismatch(String),

    /// A build-time self check failed.
    #[error("construction self-check failed: {0}")]
    Construction(String),

    /// A configured resource cap would be exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Invalid experiment or fit configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn index(msg: impl Into<String>) -> Self {
        Error::Index(msg.into())
    }
}
