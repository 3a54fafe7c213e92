//! Discrete-time quantum walk on the square lattice with a single two-level
//! coin and tunable pure dephasing.
//!
//! Each step applies a Hadamard coin, a coin-conditioned shift along x, the
//! coin again, a shift along y, and finally a random site-dependent phase
//! between the two coin states. Disorder can be redrawn per site and step,
//! frozen in time, or shared by all sites.
//!
//! Ensembles are computed by averaging pure-state trajectories
//! ([`ensemble::run_ensemble`]). For the Markovian disorder modes an exact
//! phase-averaged density-matrix evolver ([`evolve::exact_run`]) serves as an
//! independent check on small lattices.
//!
//! All numerics are generic over [`Real`]; the aliases below fix `f64`.

pub mod analysis;
pub mod disorder;
pub mod ensemble;
pub mod error;
pub mod evolve;
pub mod lattice;
pub mod scalar;

pub use analysis::{
    axis_cuts, distribution, fit_localization, fit_localization_cuts, fit_scaling_exponent, mean_position, variance,
    AxisCuts, AxisProfile, Distribution2D, LineFit, LocalizationFit, ProfileFit, ScalingFit,
};
pub use disorder::{derive_trajectory_seed, DisorderConfig, DisorderMode, PhaseMatrix, PhaseSource};
pub use ensemble::{merge_results, run_ensemble, run_ensemble_range, run_ensemble_with, EnsembleResult, StepStats};
pub use error::{Error, Result};
pub use evolve::{exact_run, exact_step_density, run_trajectory, step, DampingFactors, DensityState, ExactRun};
pub use lattice::{CoinAmplitudes, SiteIndex, WalkState};
pub use scalar::Real;

pub type WalkStateF64 = WalkState<f64>;
pub type PhaseMatrixF64 = PhaseMatrix<f64>;
pub type ConfigF64 = DisorderConfig<f64>;
pub type DistributionF64 = Distribution2D<f64>;
pub type DensityStateF64 = DensityState<f64>;
pub type EnsembleF64 = EnsembleResult<f64>;
pub type ExactRunF64 = ExactRun<f64>;

pub type WalkStateF32 = WalkState<f32>;
pub type ConfigF32 = DisorderConfig<f32>;
pub type DistributionF32 = Distribution2D<f32>;
