use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("infeasible power profile: {0}")]
    Infeasible(String),

    #[error("water-level bisection did not converge after {iterations} iterations (bracket [{lo}, {hi}])")]
    Bisection { iterations: usize, lo: f64, hi: f64 },

    #[error(
        "enumeration cap exceeded: {num_channels}^{num_players} profiles > cap {cap}; use best-response sampling instead"
    )]
    CapExceeded {
        num_players: usize,
        num_channels: usize,
        cap: u64,
    },

    #[error("best-response dynamics did not converge in {rounds} rounds (residual {residual:e})")]
    NotConverged { rounds: usize, residual: f64 },

    #[error("classification failed: {0}")]
    Classification(String),

    #[error("tie: {0}")]
    Tie(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
