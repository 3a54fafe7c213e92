//! One walk step and whole trajectories.
//!
//! A step is `P S_Y H S_X H`: coin, shift along x, coin, shift along y, then
//! the site-diagonal dephasing drawn for that step. The dephasing phases are
//! requested only after both shifts, for the support the state has reached.

mod density;

pub use density::{exact_run, exact_step_density, DampingFactors, DensityState, ExactRun};

use crate::analysis::Distribution2D;
use crate::disorder::{DisorderConfig, PhaseMatrix, PhaseSource};
use crate::error::{Error, Result};
use crate::lattice::WalkState;
use crate::scalar::Real;

/// Coin and both conditional shifts, without dephasing.
pub fn apply_walk_unitaries<T: Real>(state: &mut WalkState<T>) {
    state.apply_coin();
    state.apply_shift_x();
    state.apply_coin();
    state.apply_shift_y();
}

/// Advances `state` by one full step using the given phases.
pub fn step<T: Real>(state: &mut WalkState<T>, phases: &PhaseMatrix<T>) -> Result<()> {
    apply_walk_unitaries(state);
    state.apply_dephasing(phases)?;
    state.advance_step_count();
    Ok(())
}

/// Advances `state` by one step, drawing phases from `source`.
pub fn step_with_source<T: Real>(state: &mut WalkState<T>, source: &mut PhaseSource<T>) -> Result<()> {
    apply_walk_unitaries(state);
    let phases = source.phases_for_step(state.step_count() + 1, state.sites());
    state.apply_dephasing(&phases)?;
    state.advance_step_count();
    Ok(())
}

fn check_norm<T: Real>(state: &WalkState<T>) -> Result<()> {
    let drift = (state.norm_sqr() - T::one()).abs();
    if !state.is_finite() || !(drift <= T::norm_drift_limit()) {
        return Err(Error::NormDrift {
            step: state.step_count(),
            drift: drift.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Output of one realization.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    /// Site distributions for steps `0..=N`, all on the square `|i|, |j| <= N`.
    pub snapshots: Vec<Distribution2D<T>>,
    /// Full states for steps `0..=N`, if requested.
    pub states: Option<Vec<WalkState<T>>>,
}

/// Runs realization `trajectory_index` of `config` and returns the site
/// distributions after every step, starting with step 0.
pub fn run_trajectory<T: Real>(config: &DisorderConfig<T>, trajectory_index: u64) -> Result<Vec<Distribution2D<T>>> {
    run_trajectory_with(config, trajectory_index, false).map(|t| t.snapshots)
}

pub fn run_trajectory_with<T: Real>(
    config: &DisorderConfig<T>,
    trajectory_index: u64,
    keep_states: bool,
) -> Result<Trajectory<T>> {
    config.validate()?;
    let mut source = PhaseSource::for_trajectory(config, trajectory_index)?;
    let n_max = config.steps;
    let mut state = WalkState::initial();
    let mut snapshots = Vec::with_capacity(n_max + 1);
    let mut states = keep_states.then(|| Vec::with_capacity(n_max + 1));
    snapshots.push(Distribution2D::from_state(&state, n_max)?);
    if let Some(s) = states.as_mut() {
        s.push(state.clone());
    }
    for _ in 0..n_max {
        step_with_source(&mut state, &mut source)?;
        check_norm(&state)?;
        snapshots.push(Distribution2D::from_state(&state, n_max)?);
        if let Some(s) = states.as_mut() {
            s.push(state.clone());
        }
    }
    Ok(Trajectory { snapshots, states })
}
