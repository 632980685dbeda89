use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("basis of {size} states exceeds the configured maximum of {max}")]
    Capacity { size: u128, max: usize },

    #[error("eigensolver did not converge after {iterations} matrix-vector products; best residuals {residuals:?}")]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("root not bracketed: {0}")]
    RootNotBracketed(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("state vector not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("propagation step rejected after {halvings} halvings at t = {time}")]
    StepRejected { halvings: usize, time: f64 },

    #[error("confinement resonance: a_perp - C a = {0} <= 0")]
    ConfinementResonance(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
