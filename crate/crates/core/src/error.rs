use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not pure (purity {purity})")]
    NotPure { purity: f64 },

    #[error("efficiency {0} outside [0, 1]")]
    InvalidEfficiency(f64),

    #[error("outside the regime of validity: {0}")]
    OutOfRegime(String),

    #[error("series is empty")]
    EmptySeries,

    #[error("time step too large: {0}")]
    StepTooLarge(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("time grids of the aggregated series do not line up")]
    MisalignedGrids,

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
