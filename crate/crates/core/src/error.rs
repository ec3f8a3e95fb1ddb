use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no convergence after {iterations} iterations: {what}")]
    NonConvergence {
        what: String,
        iterations: usize,
        residuals: Vec<f64>,
    },
    #[error("tolerance not met: estimated error {est_error:e} > {tol:e}")]
    ToleranceNotMet { est_error: f64, tol: f64 },
    #[error("degenerate denominator {value:e} at t={t}")]
    Degeneracy { t: f64, value: f64 },
    #[error("local error estimate {estimate:e} exceeds {tol:e} at t={t}")]
    StepSize { t: f64, estimate: f64, tol: f64 },
    #[error("no grid point in window [{lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("ordering error: {0}")]
    Ordering(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Domain(msg.into()))
}
