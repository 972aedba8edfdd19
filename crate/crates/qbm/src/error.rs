use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{0} is outside the domain of the function")]
    Domain(String),

    #[error("time grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("caustic at t = {t} ns: |g(t)| = {g:e} is below the threshold")]
    Caustic { t: f64, g: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("characteristic function does not decay: {0}")]
    NotIntegrable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
