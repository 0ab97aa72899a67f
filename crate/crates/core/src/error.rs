use thiserror::Error;

/// Errors raised by the solver and the diagnostics built on it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular coefficient: {which} vanishes at z = {z}")]
    SingularCoefficient { which: &'static str, z: f64 },

    #[error("frequency {omega} lies within {radius} of the singular root {root}")]
    SingularFrequency { omega: f64, root: f64, radius: f64 },

    #[error("need at least {need} snapshots, got {got}")]
    TooFewSnapshots { need: usize, got: usize },

    #[error("modulus vanishes near t = {t}; modulus/phase split undefined")]
    ZeroModulus { t: f64 },

    #[error("solution became non-finite; last good z = {last_good_z}")]
    Diverged { last_good_z: f64 },

    #[error("guard band leak at z = {z}: edge/peak ratio {ratio:.3e} exceeds {tol:.3e}")]
    GuardBreach { z: f64, ratio: f64, tol: f64 },

    #[error("step size {dz} is too large for rate {rate} (limit {limit})")]
    StepSize { dz: f64, rate: f64, limit: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics themselves (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Diverged { .. } | Error::GuardBreach { .. } | Error::StepSize { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
