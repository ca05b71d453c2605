use thiserror::Error;

/// Errors raised by family evaluation, the condition suites and the propagator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("time {t} lies outside [0, 1]")]
    Domain { t: f64 },

    #[error("numerical breakdown at t = {t}: condition number estimate {cond:e} exceeds limit")]
    Breakdown { t: f64, cond: f64 },

    #[error("closed-form derivative unavailable for coefficient kind `{kind}`")]
    DerivativeUnavailable { kind: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
