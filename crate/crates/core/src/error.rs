use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("party index {index} out of range for {n_parties} parties")]
    PartyOutOfRange { index: usize, n_parties: usize },

    #[error("setting index {index} out of range for {n_settings} settings")]
    SettingOutOfRange { index: usize, n_settings: usize },

    #[error("invalid qubit index set: {0}")]
    InvalidIndexSet(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("scenario mismatch: ({0}) vs ({1})")]
    ScenarioMismatch(String, String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("computation budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
