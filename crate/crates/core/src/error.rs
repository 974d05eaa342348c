use thiserror::Error;

/// Errors raised by the physics layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("singular response at delta = {delta} (|det| = {magnitude:e})")]
    Singular { delta: f64, magnitude: f64 },

    #[error("ill-conditioned scattering system at delta = {delta} (condition estimate {condition:e})")]
    IllConditioned { delta: f64, condition: f64 },

    #[error(
        "disorder too strong: dimer {dimer} of realization {realization} needed more than {limit} redraws"
    )]
    DisorderTooStrong {
        realization: u64,
        dimer: usize,
        limit: u32,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
