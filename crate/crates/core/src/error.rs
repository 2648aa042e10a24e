use thiserror::Error;

/// Errors raised by network construction, model handling, estimation and I/O.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GnarError {
    #[error("node count must be at least 1")]
    EmptyNetwork,

    #[error("edge ({from}, {to}) references a node outside 1..={nodes}")]
    NodeOutOfRange { from: usize, to: usize, nodes: usize },

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("invalid weight matrix: {0}")]
    InvalidWeights(String),

    #[error("invalid community partition: {0}")]
    InvalidPartition(String),

    #[error("unknown community {0}")]
    UnknownCommunity(usize),

    #[error("invalid model order: {0}")]
    InvalidOrder(String),

    #[error("stage {stage} exceeds the largest finite distance in the network ({r_max})")]
    StageOutOfRange { stage: usize, r_max: usize },

    #[error("coefficients do not match the model order: {0}")]
    CoefficientMismatch(String),

    #[error("noise standard deviation must be positive and finite, got {0}")]
    InvalidNoiseSd(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("series too short: need more than {required} time steps, got {actual}")]
    SeriesTooShort { required: usize, actual: usize },

    #[error("model is not stationary (largest absolute coefficient sum {max_sum}); pass the non-stationary override to proceed")]
    NonStationary { max_sum: f64 },

    #[error("design matrix is rank deficient; dependent columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),

    #[error("no residual degrees of freedom ({rows} rows, {columns} columns)")]
    NoDegreesOfFreedom { rows: usize, columns: usize },

    #[error("covariance matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("lag {lag} must satisfy 1 <= lag < {len}")]
    InvalidLag { lag: usize, len: usize },

    #[error("node {0} has a constant series and cannot be standardised")]
    ConstantSeries(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("election data: {0}")]
    Election(String),

    #[error("render error: {0}")]
    Render(String),
}

pub type Result<T> = std::result::Result<T, GnarError>;

pub(crate) fn parse_err(line: usize, message: impl Into<String>) -> GnarError {
    GnarError::Parse {
        line,
        message: message.into(),
    }
}
