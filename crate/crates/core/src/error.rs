use thiserror::Error;

/// Errors raised by density evaluation, sampling and the numerical oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// |beta1 * beta2| = 1: the geometric series and its envelope diverge.
    #[error("divergent series bound: |beta1*beta2| = {0} (must be < 1)")]
    DivergentBound(f64),

    /// A parameter regime the closed forms do not cover.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// A quadrature rule did not settle within its refinement budget.
    #[error("quadrature tolerance {tolerance:e} not met (last refinement changed the value by {achieved:e})")]
    ToleranceNotMet { tolerance: f64, achieved: f64 },

    /// Inconsistent configuration, e.g. barriers that are not lattice nodes.
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {value}")))
    }
}

pub(crate) fn ensure_positive_time(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "time must be positive and finite, got {t}"
        )))
    }
}
