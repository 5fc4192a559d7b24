use thiserror::Error;

/// Errors shared across the simulator, chain, and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit target {target} out of range for {n_qubits}-qubit state")]
    TargetOutOfRange { target: usize, n_qubits: usize },
    #[error("gate targets must be distinct")]
    DuplicateTargets,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("amplitude vector length {got} is not 2^{n_qubits}")]
    BadAmplitudeLength { n_qubits: usize, got: usize },
    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("parameter vector length {got}, ansatz expects {expected}")]
    ParamCountMismatch { expected: usize, got: usize },
    #[error("observable is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },
    #[error("system of {n} qubits exceeds the dense limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("chain needs at least 2 sites, got {0}")]
    ChainTooShort(usize),
    #[error("bond mismatch between adjacent sites: {left} vs {right}")]
    BondMismatch { left: usize, right: usize },
    #[error("bipartition sizes must be nonzero")]
    EmptyBipartition,
    #[error("site index {index} out of range for {len} sites")]
    SiteIndexOutOfRange { index: usize, len: usize },
    #[error("zero vector where a state was expected")]
    ZeroVector,
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
