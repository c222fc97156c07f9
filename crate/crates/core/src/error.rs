//! Shared error type for the toolkit.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by any stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: max |A - A'| = {max_asymmetry:.3e} exceeds {tolerance:.1e}")]
    NotSymmetric { max_asymmetry: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver did not converge within {max_iter} iterations")]
    EigenDidNotConverge { max_iter: usize },

    #[error("matrix is not positive definite: Cholesky factorization failed")]
    NotPositiveDefinite,

    #[error(
        "kernel matrix at sigma = {sigma} could not be factorized even with ridge {max_ridge:.1e}; \
         anchors are numerically coincident or the scale is far too large"
    )]
    IllConditionedKernel { sigma: f64, max_ridge: f64 },

    #[error("sigma search failed: every grid point failed to factorize")]
    SigmaSearchFailed,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model file version mismatch: found {found:?}, expected {expected:?}")]
    ModelVersion { found: String, expected: String },

    #[error("model file parse error at byte {offset} (line {line}, column {column}): {message}")]
    ModelParse {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("model file schema violation: {0}")]
    ModelSchema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
