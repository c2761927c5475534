use thiserror::Error;

/// Errors produced by the analytic evaluators, samplers and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimate {estimate:e}, residual {residual:e}")]
    NonConvergence { estimate: f64, residual: f64 },

    #[error("root not bracketed: g(lo) = {g_lo:e}, g(hi) = {g_hi:e}")]
    NotBracketed { g_lo: f64, g_hi: f64 },

    #[error("incompatible method and scenario: {0}")]
    Incompatible(String),

    #[error("monotonicity check failed: {0}")]
    NotMonotone(String),

    #[error("no position fix: {0}")]
    NoFix(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
