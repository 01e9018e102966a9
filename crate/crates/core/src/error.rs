use thiserror::Error;

use crate::tensor::TensorShape;

/// Errors produced by tensor construction, inverses, solvers and generators.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("entry count mismatch: shape {shape} needs {expected} entries, got {actual}")]
    LengthMismatch {
        shape: TensorShape,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite entry at flat position {position}")]
    NonFinite { position: usize },

    #[error("{op}: cannot contract {left} with {right}")]
    ShapeMismatch {
        op: &'static str,
        left: TensorShape,
        right: TensorShape,
    },

    #[error("{op}: tensor of shape {shape} is not square")]
    NotSquare {
        op: &'static str,
        shape: TensorShape,
    },

    #[error("matrix of size {rows}x{cols} does not match shape {shape}")]
    MatrixMismatch {
        rows: usize,
        cols: usize,
        shape: TensorShape,
    },

    #[error("index {index} exceeds 1: group and core inverses do not exist")]
    IndexTooHigh { index: usize },

    #[error("numerical rank is ambiguous: singular value {sigma:e} is too close to threshold {threshold:e}")]
    RankAmbiguous { sigma: f64, threshold: f64 },

    #[error("singular value decomposition did not converge")]
    NoConvergence,

    #[error("system is not consistent: certificate residual {residual:e}")]
    NotConsistent { residual: f64 },

    #[error("generator {family} failed to satisfy its constraints after {attempts} attempts")]
    GenerationExhausted { family: String, attempts: usize },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("grid size m = {m} is below the minimum of 3")]
    GridTooSmall { m: usize },

    #[error("tensor JSON error at `{path}`: {message}")]
    Json { path: String, message: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// True for failures of the numerics (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IndexTooHigh { .. }
                | Error::RankAmbiguous { .. }
                | Error::NotConsistent { .. }
                | Error::NoConvergence
                | Error::GenerationExhausted { .. }
        )
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidShape(_) => "invalid_shape",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::NotSquare { .. } => "not_square",
            Error::MatrixMismatch { .. } => "matrix_mismatch",
            Error::IndexTooHigh { .. } => "index_too_high",
            Error::RankAmbiguous { .. } => "rank_ambiguous",
            Error::NotConsistent { .. } => "not_consistent",
            Error::NoConvergence => "no_convergence",
            Error::GenerationExhausted { .. } => "generation_exhausted",
            Error::InvalidOption(_) => "invalid_option",
            Error::GridTooSmall { .. } => "grid_too_small",
            Error::Json { .. } => "json",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
