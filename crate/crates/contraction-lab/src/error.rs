use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NonSquare { rows: usize, cols: usize },

    #[error("empty matrix or vector")]
    Empty,

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}")]
    RowSumViolation { row: usize, sum: f64 },

    #[error("weights sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("non-finite value encountered")]
    NonFinite,

    #[error("length mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("stationary distribution is not unique (null space dimension {dim})")]
    NonUniqueStationary { dim: usize },

    #[error("measure is not stationary for the kernel (residual {residual:e})")]
    NotStationary { residual: f64 },

    #[error("pushed-forward measure has zero mass at state {state}")]
    ZeroPushedMass { state: usize },

    #[error("measure has zero mass at state {state}")]
    ZeroMass { state: usize },

    #[error("graph is not connected")]
    DisconnectedGraph,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("matrix is not doubly stochastic (column {col} sums to {sum})")]
    NotDoublyStochastic { col: usize, sum: f64 },

    #[error("no interior minimiser found while evaluating {0}")]
    BracketFailure(&'static str),

    #[error("nu is not absolutely continuous w.r.t. mu at state {state}")]
    AbsoluteContinuityViolation { state: usize },

    #[error("lambda = {lambda} outside the admissible range [0, {max})")]
    LambdaOutOfRange { lambda: f64, max: f64 },

    #[error("divergence D(nu||mu) is zero; the KL bound degenerates")]
    DegenerateDivergence,

    #[error("target confidence {delta} is not above the stationary term {k}")]
    DeltaTooSmall { delta: f64, k: f64 },

    #[error("mixing threshold not reached within {max_t} steps")]
    NotReached { max_t: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown Young function '{0}'")]
    UnknownYoung(String),
}

pub type Result<T> = std::result::Result<T, Error>;
