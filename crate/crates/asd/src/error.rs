//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("payload mismatch: environment expects {expected}, item carries {found}")]
    PayloadMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("horizon {horizon} exceeds pool size {pool}")]
    HorizonExceedsPool { horizon: usize, pool: usize },

    #[error("item {0} is not active")]
    InactiveItem(usize),

    #[error("index {index} out of range ({len} entries)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("candidate pool has no active items")]
    EmptyPool,

    #[error("posterior sample set is empty")]
    EmptySampleSet,

    #[error("{what} must lie in {range}, got {value}")]
    OutOfRange {
        what: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix in {0} is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("sampling failed: {0}")]
    Sampling(&'static str),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("joint distribution would have {states} states, limit is {limit}")]
    JointTooLarge { states: usize, limit: usize },

    #[error("policy {policy} cannot run here: {reason}")]
    IncompatiblePolicy { policy: String, reason: String },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("unknown target column {0:?}")]
    UnknownTarget(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("invalid combination: {0}")]
    InvalidCombination(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
