use thiserror::Error;

/// Errors raised by operator construction, model assembly, integration and the oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("pulse truncation too severe: {0}")]
    TruncationTooSevere(String),
    #[error("Fock truncation error: {0}")]
    Truncation(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("step size underflow at t = {t}: {detail}")]
    Stiffness { t: f64, detail: String },
    #[error("state corruption at t = {t}: {detail}")]
    StateCorruption { t: f64, detail: String },
    #[error("insufficient time-bin resolution: {0}")]
    Resolution(String),
    #[error("equivalence check failed: {0}")]
    Equivalence(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalFailure(_)
                | Error::Stiffness { .. }
                | Error::StateCorruption { .. }
                | Error::Equivalence(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
