use thiserror::Error;

/// Errors produced by the clustering library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("cannot take the mean of an empty point set")]
    EmptySet,

    /// Rotations need at least two dimensions.
    #[error("no orthonormal direction exists in dimension 1")]
    DegenerateDimension,

    #[error("cannot rotate a point about itself")]
    ZeroRadius,

    /// Centroid movement is zero; the iteration has nothing left to do.
    #[error("centroid movement is zero (converged)")]
    Converged,

    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("candidate list is empty")]
    NoCandidates,

    #[error("no grid candidate falls inside the sampling-zone ball")]
    GridTooCoarse,

    #[error("k = {k} exceeds the number of data points {n}")]
    TooManyClusters { k: usize, n: usize },

    #[error("cluster index {index} out of range for k = {k}")]
    ClusterIndexOutOfRange { index: usize, k: usize },

    #[error("centroid is not the mean of the cluster (offset {offset:.3e})")]
    NotClusterMean { offset: f64 },

    #[error("row {row}, column {col}: {reason}")]
    CsvCell {
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("row {row} has {got} columns, expected {expected}")]
    CsvRagged {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
