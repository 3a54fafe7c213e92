use thiserror::Error;

use crate::disorder::DisorderMode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zeta = {0} is outside [0, pi]; pi is the maximal phase between the two polarizations")]
    ZetaOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no dephasing phase for occupied site ({i}, {j}) at step {step}")]
    MissingPhase { i: i32, j: i32, step: usize },

    #[error("{0} disorder has no step-factorizing averaged channel; use the trajectory engine")]
    UnsupportedMode(DisorderMode),

    #[error("lattice half-width {half_width} cannot hold step {step}")]
    LatticeTooSmall { half_width: usize, step: usize },

    #[error("norm drifted by {drift:e} at step {step}")]
    NormDrift { step: usize, drift: f64 },

    #[error("trajectory {index} failed: {source}")]
    Trajectory {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("cannot merge ensemble results: {0}")]
    Merge(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}
