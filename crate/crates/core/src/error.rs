use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("tolerance not met in {context}: estimate {estimate:e}, error {error:e}")]
    ToleranceNotMet {
        context: String,
        estimate: f64,
        error: f64,
    },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
