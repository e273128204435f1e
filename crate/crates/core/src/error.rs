use thiserror::Error;

/// Errors raised while constructing or evaluating loops.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate phase shifts: {0}")]
    DegenerateShift(String),

    #[error("unsupported form: {0}")]
    Unsupported(String),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("infeasible specification: {0}")]
    Infeasible(String),

    #[error("loop cannot be tilted: {0}")]
    Untiltable(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("open curve: {0}")]
    OpenCurve(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects non-finite values with a named parameter error.
pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::param(name, format!("must be finite, got {value}")))
    }
}
