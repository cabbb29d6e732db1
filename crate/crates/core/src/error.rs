use thiserror::Error;

/// Errors raised by the grid calculus, the solvers and the oracles.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid time {t}: {reason}")]
    InvalidTime { t: f64, reason: &'static str },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("grid functions live on different domains")]
    DomainMismatch,

    #[error("duality map is undefined at the zero element")]
    ZeroElement,

    #[error("non-finite value {value} in {context}")]
    NonFiniteValue { context: &'static str, value: f64 },

    #[error("nonlinearity produced a non-finite value at t={t}, x={x}, v={v}")]
    NonlinearityEvaluation { t: f64, x: f64, v: f64 },

    #[error("time {t} is not aligned with the time grid (step {dt})")]
    GridAlignment { t: f64, dt: f64 },

    #[error("trajectory blew up at step {step}")]
    BlowUp { step: usize },

    #[error("Picard iteration did not reach tolerance after {iterations} iterations (last residual {last_residual:e})")]
    MaxIterExceeded {
        iterations: usize,
        last_residual: f64,
        residual_history: Vec<f64>,
    },

    #[error("iterate {iteration} left the ball: sup-norm {norm} >= R_outer {r_outer}")]
    BallExit {
        iteration: usize,
        norm: f64,
        r_outer: f64,
        residual_history: Vec<f64>,
    },

    #[error("trajectory is not periodic: gluing residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotPeriodic { residual: f64, tolerance: f64 },

    #[error("oracle Newton iteration failed to converge at step {step}")]
    OracleDivergence { step: usize },

    #[error("oracle size limit exceeded: N = {n} > {max}")]
    OracleSize { n: usize, max: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
