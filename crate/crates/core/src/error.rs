use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The requested particle number cannot be placed under the occupation caps.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A dimension or count exceeds the configured or representable limit.
    #[error("overflow: {0}")]
    Overflow(String),

    #[error("state not found in sector: {0}")]
    NotFound(String),

    /// Basis and parameters (or two operands) describe different sectors.
    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("out of range: {0}")]
    Range(String),

    /// A dense routine was asked for a matrix larger than its limit.
    #[error("dimension {dim} exceeds dense limit {limit}")]
    Dimension { dim: usize, limit: usize },

    #[error("no convergence after {iterations} iterations (best residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
