use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pivot count k={0} outside supported range {1}..={2}")]
    KOutOfRange(usize, usize, usize),
    #[error("expected vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input is not a probability vector on the simplex: {0}")]
    NotOnSimplex(String),
    #[error("spacing coordinate must be strictly positive")]
    ZeroSpacing,
    #[error("duplicate key encountered; keys must be pairwise distinct")]
    DuplicateKey,
    #[error("oracle strategy requires keys in [0,1]")]
    OracleNeedsUnitKeys,
    #[error("fixed-tree index {0} out of range for k={1} ({2} trees)")]
    TreeIndexOutOfRange(usize, usize, usize),
    #[error("partition requires more than k elements, got {0} for k={1}")]
    PartitionTooSmall(usize, usize),
    #[error("no exact alpha_K tabulated for k={0}; supply an estimate explicitly")]
    NoExactAlpha(usize),
    #[error("brute force enumeration refused for n={0} > {1}")]
    BruteForceTooLarge(usize, usize),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("samples must be non-empty: sizes {0} and {1}")]
    SampleSizeMismatch(usize, usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
