use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("system size {requested} exceeds the limit of {limit} for {what}")]
    Size {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("invalid site index {site} for a chain of length {length}")]
    InvalidSite { site: usize, length: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("Hamiltonian does not respect the sector symmetry: {0}")]
    Symmetry(String),

    #[error("matrix is not Hermitian (max |A - A^dagger| = {0:e})")]
    NonHermitian(f64),

    #[error("too few levels: {have} available, at least {need} required")]
    TooFewLevels { have: usize, need: usize },

    #[error("too few samples: {have} available, at least {need} required")]
    TooFewSamples { have: usize, need: usize },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("environment state is mixed (purity {0}); a pure state is required")]
    MixedEnvironment(f64),

    #[error("eigendecomposition failed to converge")]
    Eigen,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
