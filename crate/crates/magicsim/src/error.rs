//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: bad Pauli literal, invalid Kraus list, broken JSON, …
    #[error("parse error: {0}")]
    Parse(String),

    /// A structurally valid request that violates a documented limit
    /// (for example a dense conversion beyond the supported qubit count).
    #[error("limit exceeded: {0}")]
    Limit(String),

    /// The LP solver failed to converge or produced an inconsistent
    /// certificate.
    #[error("solver failure: {0}")]
    Solver(String),

    /// A stabiliser-catalogue cache file is missing, corrupt, or has a
    /// mismatched version.
    #[error("cache error: {0}")]
    Cache(String),

    /// Conditioning on an impossible (zero-probability) event.
    #[error("zero-probability event: {0}")]
    ZeroProbability(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code associated with this error class, used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::Limit(_) => 3,
            Error::Solver(_) | Error::ZeroProbability(_) => 4,
            Error::Cache(_) | Error::Io(_) => 5,
        }
    }
}
