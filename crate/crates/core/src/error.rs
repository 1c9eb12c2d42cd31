use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty matrix: block spec has total order 0")]
    EmptyMatrix,

    #[error("matrix of order {order} exceeds the brute-force cap of {cap}")]
    SizeCap { order: usize, cap: usize },

    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("row {row} has sum {sum} > 1; not sub-Markovian")]
    NotSubMarkovian { row: usize, sum: f64 },

    #[error("chain is not transient (spectral radius {radius})")]
    NotTransient { radius: f64 },

    #[error("root is unreachable from vertex {vertex}")]
    Unreachable { vertex: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("sampling diagnostic: {0}")]
    Sampling(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
