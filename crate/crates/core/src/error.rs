use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("belief {0} outside [0, 1]")]
    InvalidBelief(f64),

    #[error("hitting time undefined from {from} to {target}: {reason}")]
    HittingTime {
        from: f64,
        target: f64,
        reason: &'static str,
    },

    #[error("no root of {what} bracketed in [{lo}, {hi}]")]
    NoBracket {
        what: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("diagnostic `{check}` failed: residual {residual:e} exceeds {tolerance:e}")]
    Diagnostic {
        check: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("value iteration did not converge in {iterations} iterations (last delta {delta:e})")]
    NoConvergence { iterations: usize, delta: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("inputs were computed for different parameters")]
    ParamsMismatch,

    #[error("shape detection: {0}")]
    Shape(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
