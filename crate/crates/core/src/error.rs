use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid position: {0}")]
    InvalidPosition(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero-norm vector")]
    ZeroNorm,

    /// The Gram matrix of the stacked constraints is singular or too badly
    /// conditioned to invert.
    #[error("infeasible candidate set (condition estimate {condition:e})")]
    Infeasible { condition: f64 },

    #[error("waterfilling needs at least one positive gain")]
    EmptyGains,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
