use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("uniform distribution not allowed here")]
    Uniform,

    #[error("size budget exceeded: {what} needs {needed}, limit {limit}")]
    Budget {
        what: &'static str,
        needed: String,
        limit: String,
    },

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("no fixed point: {0}")]
    NoCrossing(String),

    #[error("shell {k} holds {available} sequences but {needed} are required per subset")]
    ShellTooSmall { k: usize, needed: u128, available: u128 },

    #[error("infeasible collection: {0}")]
    Infeasible(String),

    #[error("rate {r} outside reachable range [0, {max}]")]
    RateOutOfRange { r: f64, max: f64 },

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
