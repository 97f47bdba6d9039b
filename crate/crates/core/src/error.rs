use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("partition too fine along axis {axis}: floor({scale} / {k}^(1/d)) = 0")]
    PartitionTooFine { axis: usize, scale: f64, k: u64 },

    #[error("unsupported body for this operation: {0}")]
    UnsupportedBody(&'static str),

    #[error("Minkowski sum with an empty set")]
    EmptySummand,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("threshold below support: tau = {tau} must lie in (0, {size})")]
    ThresholdOutOfRange { tau: f64, size: usize },

    #[error("invalid field model: {0}")]
    InvalidModel(String),

    #[error("empty simulation support")]
    EmptySupport,

    #[error("region not covered by the sample: {missing} point(s) missing, e.g. {example:?}")]
    NotCovered { missing: usize, example: Vec<i64> },

    #[error("partition does not match the sample: {0}")]
    PartitionMismatch(String),

    #[error("subset family members {first} and {second} overlap at {point:?}")]
    OverlappingFamily {
        first: usize,
        second: usize,
        point: Vec<i64>,
    },

    #[error("measure has no clusters to draw from")]
    NoClusters,

    #[error("undefined estimate: {0}")]
    UndefinedEstimate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
