use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("series diverges: {0}")]
    Divergent(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error("quadrature did not converge: estimated error {est_error:e} at m = {m}")]
    NonConvergence { est_error: f64, m: usize },
    #[error("ill-conditioned resolvent: condition estimate {0:e}")]
    IllConditioned(f64),
    #[error("Richardson levels disagree by {0:e}")]
    StepCollapse(f64),
    #[error("series matching failed at level {level}, order {order}")]
    MatchingFailure { level: usize, order: usize },
    #[error("seed matching failed: {0}")]
    SeedMatching(String),
    #[error("integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },
    #[error("tolerance failure: {0}")]
    Tolerance(String),
    #[error("grid budget exceeded: {points} points > {limit}")]
    Budget { points: f64, limit: f64 },
    #[error("imaginary residual {0:e} too large")]
    ImaginaryResidual(f64),
    #[error("precision exhausted at {bits} bits (shadow disagreement {discrepancy:e}); raise precision_bits")]
    PrecisionExhausted { bits: usize, discrepancy: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
