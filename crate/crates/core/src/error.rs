use alloc::string::String;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {what} (residual {residual:.3e})")]
    Numerical { what: String, residual: f64 },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("consistency: {condition} violated by {residual:.3e}")]
    Consistency { condition: String, residual: f64 },
    #[error("simulation halted at t = {t:.6e}: {reason}")]
    Halted { t: f64, reason: String },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
