use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Hilbert space dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("site {site} is out of range for a chain of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("chain of {0} sites must be even for this criterion")]
    OddChain(usize),

    #[error("expected a qubit chain, found per-site dimensions {0:?}")]
    NotQubitChain(Vec<usize>),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("projector annihilated {attempts} reference vectors")]
    ProjectionFailed { attempts: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
