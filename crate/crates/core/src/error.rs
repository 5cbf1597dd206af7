use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {what} (requested {requested}, cap {cap})")]
    Capacity {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("divisor table too small: limit {have}, need at least {required}")]
    TableTooSmall { have: u64, required: u64 },

    #[error("accuracy {requested:e} not attainable, best achievable bound is {achievable:e}")]
    Accuracy { requested: f64, achievable: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("provenance mismatch for {path}: sidecar says {expected}, file hashes to {actual}")]
    Provenance {
        path: PathBuf,
        expected: String,
        actual: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
