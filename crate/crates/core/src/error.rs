use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("malformed data: {0}")]
    MalformedData(String),

    #[error("dimension mismatch: expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite vorticity at index {index}")]
    NonFinite { index: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of bounds for {n} nodes")]
    IndexOutOfBounds { index: usize, n: usize },

    #[error("self-induced velocity is undefined (i = j = {0})")]
    SelfInteraction(usize),

    #[error("dense matrix needs {needed} bytes, cap is {cap} bytes")]
    MemoryCapExceeded { needed: u128, cap: u128 },

    #[error("sample size {l} exceeds column count {n}")]
    SampleTooLarge { l: usize, n: usize },

    #[error("requested rank {k} exceeds sample size {l}")]
    RankTooLarge { k: usize, l: usize },

    #[error("sample was drawn for n = {sample_n} but operator has n = {op_n}")]
    SampleMismatch { sample_n: usize, op_n: usize },

    #[error("power iteration did not converge after {iterations} iterations (pair {pair}, last step {residual:e})")]
    NoConvergence {
        pair: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("degenerate sample: every eigenvalue of W is below the pseudo-inverse cutoff; resample")]
    DegenerateSample,

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("cluster count {c} is invalid for {n} points")]
    ClusterCount { c: usize, n: usize },

    #[error("decomposition failed: {0}")]
    Decomposition(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
