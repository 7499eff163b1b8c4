use thiserror::Error;

/// Errors raised by the geometry engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate chart: {0}")]
    DegenerateChart(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("invalid hypersurface: {0}")]
    InvalidHypersurface(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("structure error: {0}")]
    Structure(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(GeomError::InvalidArgument(msg.into()))
}
