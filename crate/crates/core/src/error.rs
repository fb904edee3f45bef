use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("regime violation: {0}")]
    Regime(String),

    #[error("series outside its range of validity: {0}")]
    SeriesInvalid(String),

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("quadrature did not converge after {doublings} doublings (last {last}, previous {previous})")]
    Convergence {
        doublings: u32,
        last: Complex64,
        previous: Complex64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn regime(msg: impl Into<String>) -> Error {
    Error::Regime(msg.into())
}

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite, got {value}")))
    }
}
