use thiserror::Error;

/// Errors raised by the library. Every variant names the condition that was violated.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not positive definite: Cholesky pivot {pivot:e} at index {index} is not above {threshold:e}")]
    NotPositiveDefinite { index: usize, pivot: f64, threshold: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid shape {shape}: a {dim}-dimensional Wishart requires shape > d - 1 = {}", *dim as f64 - 1.0)]
    InvalidShape { shape: f64, dim: usize },

    #[error("shape {shape} too small: E[P^-1] requires shape > d + 1 = {}", dim + 1)]
    ShapeTooSmall { shape: f64, dim: usize },

    #[error("no interior mode for shape {shape}: requires shape > d + 1 = {}", dim + 1)]
    NoInteriorMode { shape: f64, dim: usize },

    #[error("pseudocount must be a finite real > 0, got {0}")]
    InvalidPseudocount(f64),

    #[error("data set is empty")]
    EmptyData,

    #[error("ragged data: row {row} has {found} columns, expected {expected}")]
    RaggedData { row: usize, expected: usize, found: usize },

    #[error("degenerate scatter matrix: {0}")]
    DegenerateScatter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
