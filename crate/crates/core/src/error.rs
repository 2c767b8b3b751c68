use thiserror::Error;

/// Errors produced by the chain, echo and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chain spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("diagonalization failed: {0}")]
    Diagonalization(String),

    #[error("momentum modes require the unperturbed (label 00) chain")]
    NotTranslationInvariant,

    #[error("degenerate many-body ground state (gap {gap:.3e}); refusing to pick one")]
    DegenerateGroundState { gap: f64 },

    #[error("Fock-space oracle supports at most {max} sites, got {got}")]
    FockSpaceTooLarge { max: usize, got: usize },

    #[error("echo value {value} at t={t} outside [0,1] beyond numerical tolerance")]
    EchoOutOfRange { t: f64, value: f64 },

    #[error("family/echo kind mismatch: {0}")]
    FamilyMismatch(String),

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("correlation length diverges at lambda = 1")]
    CriticalPoint,

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
