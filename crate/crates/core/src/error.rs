use thiserror::Error;

use crate::metagame::NashSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-domain input data (non-finite values, shape mismatch).
    #[error("invalid input: {0}")]
    Input(String),

    /// A configuration value violates its documented range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The operation is not defined for this game or configuration.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// An API was called with an argument of the wrong kind.
    #[error("usage error: {0}")]
    Usage(String),

    /// The Nash solver could not certify the requested tolerance.
    /// The best solution found is kept so callers can decide what to do with it.
    #[error("nash solver failed: {message} (exploitability {exploitability:.3e})", exploitability = best.exploitability)]
    Solver { message: String, best: Box<NashSolution> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<toml::ser::Error> for Error {
    fn from(e: toml::ser::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
