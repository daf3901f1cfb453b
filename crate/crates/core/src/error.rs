use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("quadrature did not reach tolerance: estimate {estimate:e}, error {error:e} after {panels} panels")]
    Quadrature {
        estimate: f64,
        error: f64,
        panels: usize,
    },

    #[error("series is not alternating at term {term}")]
    NonAlternating { term: usize },

    #[error("series did not converge within {terms} terms (last term {last:e})")]
    SeriesDivergence { terms: usize, last: f64 },

    #[error("value overflows double precision: {0}")]
    Overflow(String),

    #[error("transform grid too coarse: {0}")]
    Resolution(String),

    #[error("simulation did not terminate before t = {cap}")]
    SimulationCap { cap: f64 },
}

impl Error {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}

/// Checks a strictly positive finite real.
pub(crate) fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::arg(name, format!("must be finite and > 0, got {v}")))
    }
}

pub(crate) fn nonnegative(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::arg(name, format!("must be finite and >= 0, got {v}")))
    }
}
