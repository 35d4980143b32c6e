use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite phase value: {0}")]
    NonFinitePhase(f64),
    #[error("comparison tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),
    #[error("cannot compare two all-zero matrices up to global phase")]
    ZeroMatrix,
    #[error("invalid noise model: {0}")]
    InvalidNoiseModel(String),
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
    #[error("empty trace")]
    EmptyTrace,
}

pub type Result<T> = std::result::Result<T, Error>;
