use thiserror::Error;

/// Failures reported by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge: estimated error {error_estimate:.3e} after {intervals} subintervals")]
    QuadratureNonConvergence { error_estimate: f64, intervals: usize },

    #[error("root finder diverged after {iterations} iterations; last iterate {last_re:.6e}{last_im:+.6e}i, |f| = {residual:.3e}")]
    RootNotFound {
        iterations: usize,
        last_re: f64,
        last_im: f64,
        residual: f64,
    },

    #[error("ODE step size underflow at t = {time:.6e} ns (h = {step:.3e})")]
    StepSizeUnderflow { time: f64, step: f64 },

    #[error("optimizer did not converge after {iterations} iterations (final cost {cost:.3e})")]
    OptimizerNonConvergence { iterations: usize, cost: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
