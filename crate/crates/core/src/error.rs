use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("objective {0} needs frozen noise weights but none were set")]
    MissingNoise(&'static str),

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("cost of particle {index} is NaN")]
    NanCost { index: usize },

    #[error("step called in mode {got}, expected {expected}")]
    WrongMode {
        expected: &'static str,
        got: &'static str,
    },

    #[error("inertia and friction give a zero velocity denominator (m + gamma*dt = 0)")]
    DegenerateInertia,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("marginal along axis {0} has no mass")]
    ZeroMass(&'static str),

    #[error("tridiagonal system is singular (pivot {pivot:e} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("malformed density snapshot: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
