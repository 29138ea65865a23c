use thiserror::Error;

/// Errors raised by the law evaluators, samplers and validation checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TelemaxError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge for {what}: {terms} terms, tail bound {tail_bound:e}")]
    NonConvergence {
        what: &'static str,
        terms: usize,
        tail_bound: f64,
    },

    #[error("quadrature failed: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

pub type Result<T> = std::result::Result<T, TelemaxError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(TelemaxError::Domain(msg.into()))
}
