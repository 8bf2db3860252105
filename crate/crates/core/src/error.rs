use thiserror::Error;

/// Errors raised by the state, measurement, Fisher-information and protocol layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("conditional state undefined: success probability is zero (eta = {eta}, epsilon = {epsilon})")]
    UndefinedConditionalState { eta: f64, epsilon: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "{what} did not converge: estimated error {est_error:e} exceeds tolerance {tolerance:e}"
    )]
    Nonconvergence {
        what: &'static str,
        est_error: f64,
        tolerance: f64,
    },

    #[error("unsupported state family for {0}")]
    UnsupportedFamily(&'static str),

    #[error("computation failed: {0}")]
    Computation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by a failed computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Nonconvergence { .. } | Error::Computation(_))
    }

    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
