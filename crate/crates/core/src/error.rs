use std::io;

use thiserror::Error;

/// Errors produced by the clustering library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    /// Every remaining point coincides with a chosen center, so the
    /// D² weights sum to zero and cannot be sampled from.
    #[error("degenerate weights: total weight is zero")]
    DegenerateWeights,

    #[error(
        "replicated centroid copy needs {required} bytes ({k} centers x {dims} dims x 8), \
         exceeding the 64 KiB ({limit} byte) per-worker budget"
    )]
    CapacityExceeded {
        k: usize,
        dims: usize,
        required: usize,
        limit: usize,
    },

    #[error("resource error: {0}")]
    Resource(String),

    #[error("summary error: no workers=1 shared baseline for cell {0}")]
    MissingBaseline(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
