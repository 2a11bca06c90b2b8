use thiserror::Error;

/// Errors raised by the solvers and checkers in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid level {0}: must be between 1 and {max}", max = crate::fem::MAX_LEVEL)]
    InvalidLevel(u32),
    #[error("grid mismatch: expected {expected} nodes, found {found}")]
    GridMismatch { expected: usize, found: usize },
    #[error("point t = {0} lies outside [0, 1]")]
    OutOfDomain(f64),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("singular matrix: pivot {pivot:e} at row {row}")]
    Singular { row: usize, pivot: f64 },
    #[error("newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("on level {level}: {source}")]
    AtLevel {
        level: u32,
        #[source]
        source: Box<Error>,
    },
    #[error("line search found no decrease after {0} halvings")]
    LineSearch(usize),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
