use thiserror::Error;

/// Errors raised by the spectral solvers and oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid under-resolved: {0}")]
    Resolution(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("Newton iteration did not converge after {iterations} steps (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("numerical error: {msg} (residual estimate {residual:e})")]
    Numerical { msg: String, residual: f64 },

    #[error("step size {dtau} too large for RK4: stiffest rate {rate} gives {product} > {limit}")]
    StepSize {
        dtau: f64,
        rate: f64,
        product: f64,
        limit: f64,
    },

    #[error("reality condition violated at (l={l}, m={m}): mismatch {mismatch:e}")]
    Reality { l: usize, m: i64, mismatch: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
