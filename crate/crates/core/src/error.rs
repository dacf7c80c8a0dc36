use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("vector contains a non-finite value")]
    NonFinite,

    #[error("input is empty")]
    EmptyInput,

    #[error("text not present in embedding cache: {0:?}")]
    CacheMiss(String),

    #[error("embedding service unavailable: {0}")]
    ServiceUnavailable(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed cache file at line {line}: {reason}")]
    MalformedCacheFile { line: usize, reason: String },

    #[error("k = {k} exceeds the number of samples ({m})")]
    KTooLarge { k: usize, m: usize },

    #[error("silhouette needs at least two distinct cluster labels")]
    SingleCluster,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("at least 3 responses are required for clustering, got {m}")]
    TooFewSamples { m: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("assignment result does not match the assignment matrix: {0}")]
    MismatchedInputs(String),

    #[error("no tokens survive preprocessing")]
    NoTokens,

    #[error("cluster sizes sum to {sum}, expected {m}")]
    SizeSumMismatch { sum: usize, m: usize },

    #[error("cluster {0} has no members")]
    EmptyCluster(usize),

    #[error("no titles given for assignment")]
    NoTitles,

    #[error("wordcloud has no entries")]
    EmptyWordcloud,

    #[error("malformed input at line {line}: {reason}")]
    MalformedInput { line: usize, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
