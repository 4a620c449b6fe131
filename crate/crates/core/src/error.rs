//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    BadRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("no parsable rating lines in {path}")]
    NoParsableRatings { path: PathBuf },

    #[error("no users left after requiring at least {min_ratings} ratings each")]
    AllUsersFiltered { min_ratings: usize },

    #[error("empty rating subset")]
    EmptySubset,

    #[error("rating index {index} out of range for {len} ratings")]
    InvalidIndex { index: usize, len: usize },

    #[error("fold count {k} invalid for {ratings} ratings (need 2 <= k <= |ratings|)")]
    FoldCount { k: usize, ratings: usize },

    #[error("rating {rating} outside scale bounds [{r_min}, {r_max}]")]
    RatingOutOfBounds { rating: f64, r_min: f64, r_max: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("objective is not finite{}", match rating { Some(r) => format!(" (rating index {r})"), None => String::new() })]
    NonFiniteValue { rating: Option<usize> },

    #[error("objective is not finite at the starting point")]
    NonFiniteStart,

    #[error("model file {path}: {message}")]
    ModelFormat { path: PathBuf, message: String },

    #[error("invalid metric input: {0}")]
    MetricsInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
