use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register of {0} qubits exceeds the cap of {1}")]
    TooManyQubits(usize, usize),
    #[error("invalid register: {0}")]
    InvalidRegister(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("not a valid density operator: {0}")]
    InvalidState(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("state is not pure (purity {0:.12})")]
    NotPure(f64),
    #[error("rank {rank} exceeds the configured cap {cap}")]
    RankCap { rank: usize, cap: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("integrator instability: {0}")]
    Instability(String),
}

pub type Result<T> = std::result::Result<T, Error>;
