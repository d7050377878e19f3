use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical pipeline and the verification driver.
#[derive(Debug, Error)]
pub enum Error {
    /// A function was evaluated outside the set where it is smooth
    /// (non-positive radicand, series outside its disk, chart violation, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix that must be invertible (or positive definite) is not.
    #[error("degenerate matrix: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was called on data that violates its precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Every drawn sample was rejected by the admissibility predicate.
    #[error("sampler produced no admissible point after {attempts} attempts")]
    NoAdmissibleSamples { attempts: usize },

    /// Invalid run configuration; lists every offending field.
    #[error("invalid configuration: {}", .fields.join("; "))]
    Config { fields: Vec<String> },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
