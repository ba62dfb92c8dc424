use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: expected {expected}, got {actual}")]
    InputShape { what: &'static str, expected: usize, actual: usize },

    #[error("{0}")]
    Domain(String),

    /// One of the effective gains is zero, so no power split can equalize
    /// the two arrivals.
    #[error("power allocation impossible: effective gain is zero")]
    AllocationImpossible,

    #[error("calibration failed: {0}")]
    Calibration(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
