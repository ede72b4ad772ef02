use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown party label `{0}`")]
    UnknownParty(String),

    #[error("duplicate party label `{0}`")]
    DuplicateParty(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("Kraus operators are not trace preserving (residual ‖ΣK†K − I‖ = {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("reference state has Schmidt rank {rank} < input dimension {dim}")]
    RankDeficient { rank: usize, dim: usize },

    #[error("ensemble is inconsistent with the state (trace distance {0:.3e})")]
    InconsistentEnsemble(f64),

    #[error("operation needs {needed_mb} MiB, above the {cap_mb} MiB resource cap")]
    ResourceCap { needed_mb: u64, cap_mb: u64 },

    #[error("{what} is {size}, above the cap of {cap}")]
    SizeCap { what: String, size: u128, cap: u128 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
