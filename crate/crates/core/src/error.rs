use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid latency function: {0}")]
    InvalidLatency(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid flow profile: {0}")]
    InvalidProfile(String),

    #[error("type {ty} has no strategy {strategy}")]
    UnknownStrategy { ty: usize, strategy: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("solver did not converge within {iterations} iterations (gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },

    #[error("node {to} is unreachable from {from}")]
    Unreachable { from: String, to: String },

    #[error("no trace point lies within {radius} m of an edge")]
    NoMatch { radius: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
