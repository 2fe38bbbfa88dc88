use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 1")]
    InvalidDimension(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The expected number of sampled points exceeds the configured cap.
    #[error("infeasible run: expected point count exp({log_expected:.4}) exceeds cap {cap}")]
    Feasibility { log_expected: f64, cap: f64 },

    #[error("quadrature did not reach relative tolerance {requested:e} (achieved {achieved:e})")]
    Quadrature { requested: f64, achieved: f64 },

    #[error("schedule has no entry for dimension {0}")]
    MissingScheduleEntry(u32),

    #[error("malformed configuration dump: {0}")]
    InvalidDump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
