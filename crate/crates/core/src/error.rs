use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid channel model: {0}")]
    InvalidModel(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid coefficient function: {0}")]
    InvalidCoefficient(String),

    #[error("independent-set enumeration exceeded the cap of {cap} sets")]
    EnumerationBlowup { cap: usize },

    #[error("independent-set family is empty")]
    EmptyFamily,

    #[error("iteration counter must start at 1, got {0}")]
    InvalidIteration(usize),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("oracle refused instance: {0}")]
    OracleRefused(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse config: {0}")]
    Parse(String),

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
