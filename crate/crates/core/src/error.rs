use thiserror::Error;

pub type Result<T> = std::result::Result<T, QetError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QetError {
    #[error("model needs at least 2 qubits, got {0}")]
    TooFewQubits(u64),

    #[error("couplings must be positive and finite (h = {h}, k = {k})")]
    NonPositiveCoupling { h: f64, k: f64 },

    #[error("{n} qubits exceeds the oracle cap of {cap}")]
    OracleCapExceeded { n: u64, cap: u64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (deviation {0:e})")]
    NonHermitian(f64),

    #[error("Bell value requires N >= 3")]
    BellUndefinedForN2,

    #[error("GHZ angle {0} outside [0, pi/4]")]
    AngleOutOfRange(f64),

    #[error("coupling ratio must be positive, got {0}")]
    NonPositiveRatio(f64),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("unknown figure '{0}'")]
    UnknownFigure(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
}
