//! Monte-Carlo averaging over independent phase realizations.
//!
//! Trajectories are grouped into fixed chunks of [`CHUNK`] consecutive
//! indices. Each chunk is reduced serially in index order, and chunk partials
//! are combined in ascending order, so the result does not depend on how many
//! worker threads ran the chunks.

use std::ops::Range;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::analysis::{variance, Distribution2D};
use crate::disorder::DisorderConfig;
use crate::error::{Error, Result};
use crate::evolve::run_trajectory;
use crate::scalar::Real;

/// Trajectories per reduction chunk.
pub const CHUNK: u64 = 16;

/// Averages for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepStats<T> {
    /// Realization-averaged site distribution.
    pub distribution: Distribution2D<T>,
    /// Spread of the averaged distribution.
    pub variance: T,
    /// Mean of the per-trajectory spreads.
    pub trajectory_variance_mean: T,
    /// Sum of squared deviations of the per-trajectory spreads.
    pub trajectory_variance_m2: T,
}

#[derive(Debug, Clone)]
pub struct EnsembleResult<T> {
    pub config: DisorderConfig<T>,
    /// Disjoint, ascending trajectory-index ranges that were averaged.
    pub ranges: Vec<Range<u64>>,
    /// Steps `0..=N`.
    pub steps: Vec<StepStats<T>>,
    pub wall_time: Duration,
}

impl<T: Real> EnsembleResult<T> {
    pub fn trajectories(&self) -> u64 {
        self.ranges.iter().map(|r| r.end - r.start).sum()
    }

    /// `V` of the averaged distribution, per step.
    pub fn variances(&self) -> Vec<T> {
        self.steps.iter().map(|s| s.variance).collect()
    }

    /// Sample standard deviation of the per-trajectory spreads over
    /// `sqrt(R)`, per step. Zero for a single trajectory.
    pub fn standard_errors(&self) -> Vec<T> {
        let r = self.trajectories();
        self.steps
            .iter()
            .map(|s| {
                if r < 2 {
                    T::zero()
                } else {
                    let rr = T::lit(r as f64);
                    (s.trajectory_variance_m2 / (rr - T::one()) / rr).sqrt()
                }
            })
            .collect()
    }

    pub fn final_distribution(&self) -> &Distribution2D<T> {
        &self.steps.last().expect("at least step 0").distribution
    }

    /// Same numbers, ignoring wall time.
    pub fn same_numbers(&self, other: &Self) -> bool {
        self.config == other.config && self.ranges == other.ranges && self.steps == other.steps
    }
}

/// Running sums over a contiguous block of trajectories.
#[derive(Debug, Clone)]
struct Partial<T> {
    count: u64,
    prob_sums: Vec<Vec<T>>,
    v_mean: Vec<T>,
    v_m2: Vec<T>,
}

impl<T: Real> Partial<T> {
    fn empty(steps: usize, cells: usize) -> Self {
        Partial {
            count: 0,
            prob_sums: vec![vec![T::zero(); cells]; steps + 1],
            v_mean: vec![T::zero(); steps + 1],
            v_m2: vec![T::zero(); steps + 1],
        }
    }

    fn push(&mut self, snapshots: &[Distribution2D<T>]) {
        self.count += 1;
        let k = T::lit(self.count as f64);
        for (n, snap) in snapshots.iter().enumerate() {
            for (acc, p) in self.prob_sums[n].iter_mut().zip(snap.as_slice()) {
                *acc = *acc + *p;
            }
            let v = variance(snap);
            let delta = v - self.v_mean[n];
            self.v_mean[n] = self.v_mean[n] + delta / k;
            self.v_m2[n] = self.v_m2[n] + delta * (v - self.v_mean[n]);
        }
    }

    /// Chan et al. pairwise update; `other` covers later indices.
    fn absorb(&mut self, other: &Partial<T>) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let na = T::lit(self.count as f64);
        let nb = T::lit(other.count as f64);
        let n = na + nb;
        for s in 0..self.v_mean.len() {
            for (a, b) in self.prob_sums[s].iter_mut().zip(&other.prob_sums[s]) {
                *a = *a + *b;
            }
            let delta = other.v_mean[s] - self.v_mean[s];
            self.v_mean[s] = self.v_mean[s] + delta * nb / n;
            self.v_m2[s] = self.v_m2[s] + other.v_m2[s] + delta * delta * na * nb / n;
        }
        self.count += other.count;
    }

    fn from_result(result: &EnsembleResult<T>) -> Self {
        let count = result.trajectories();
        let k = T::lit(count as f64);
        Partial {
            count,
            prob_sums: result
                .steps
                .iter()
                .map(|s| s.distribution.as_slice().iter().map(|p| *p * k).collect())
                .collect(),
            v_mean: result.steps.iter().map(|s| s.trajectory_variance_mean).collect(),
            v_m2: result.steps.iter().map(|s| s.trajectory_variance_m2).collect(),
        }
    }

    fn finish(self, config: DisorderConfig<T>, ranges: Vec<Range<u64>>, wall_time: Duration) -> EnsembleResult<T> {
        let k = T::lit(self.count as f64);
        let steps = self
            .prob_sums
            .into_iter()
            .zip(self.v_mean)
            .zip(self.v_m2)
            .enumerate()
            .map(|(n, ((sums, v_mean), v_m2))| {
                let mut distribution = Distribution2D::zeros(n, config.steps);
                for (p, s) in distribution.as_mut_slice().iter_mut().zip(sums) {
                    *p = s / k;
                }
                StepStats {
                    variance: variance(&distribution),
                    distribution,
                    trajectory_variance_mean: v_mean,
                    trajectory_variance_m2: v_m2,
                }
            })
            .collect();
        EnsembleResult {
            config,
            ranges,
            steps,
            wall_time,
        }
    }
}

fn run_chunk<T: Real>(config: &DisorderConfig<T>, indices: Range<u64>) -> Result<Partial<T>> {
    let side = 2 * config.steps + 1;
    let mut partial = Partial::empty(config.steps, side * side);
    for index in indices {
        let snapshots = run_trajectory(config, index).map_err(|e| Error::Trajectory {
            index,
            source: Box::new(e),
        })?;
        partial.push(&snapshots);
    }
    Ok(partial)
}

/// Averages trajectories `0..R` on the default thread pool.
pub fn run_ensemble<T: Real>(config: &DisorderConfig<T>) -> Result<EnsembleResult<T>> {
    run_ensemble_range(config, 0..config.realizations, None)
}

/// Averages trajectories `0..R` on `threads` workers (`None` for the
/// machine default).
pub fn run_ensemble_with<T: Real>(config: &DisorderConfig<T>, threads: Option<usize>) -> Result<EnsembleResult<T>> {
    run_ensemble_range(config, 0..config.realizations, threads)
}

/// Averages the trajectories with indices in `indices`.
pub fn run_ensemble_range<T: Real>(
    config: &DisorderConfig<T>,
    indices: Range<u64>,
    threads: Option<usize>,
) -> Result<EnsembleResult<T>> {
    config.validate()?;
    if indices.is_empty() {
        return Err(Error::InvalidConfig("empty trajectory range".into()));
    }
    let started = Instant::now();
    let chunks: Vec<Range<u64>> = (indices.start..indices.end)
        .step_by(CHUNK as usize)
        .map(|s| s..(s + CHUNK).min(indices.end))
        .collect();

    let work = || -> Vec<Result<Partial<T>>> {
        chunks.par_iter().map(|c| run_chunk(config, c.clone())).collect()
    };
    let partials = match threads {
        None => work(),
        Some(0) => return Err(Error::InvalidConfig("threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))?
            .install(work),
    };

    let side = 2 * config.steps + 1;
    let mut total = Partial::empty(config.steps, side * side);
    for p in partials {
        total.absorb(&p?);
    }
    Ok(total.finish(*config, vec![indices], started.elapsed()))
}

/// Combines ensembles over disjoint trajectory ranges of the same
/// configuration, in ascending range order.
pub fn merge_results<T: Real>(partials: &[EnsembleResult<T>]) -> Result<EnsembleResult<T>> {
    let first = partials
        .first()
        .ok_or_else(|| Error::Merge("nothing to merge".into()))?;
    if partials.iter().any(|p| p.config != first.config) {
        return Err(Error::Merge("configurations differ".into()));
    }
    let mut order: Vec<&EnsembleResult<T>> = partials.iter().collect();
    order.sort_by_key(|p| p.ranges.first().map_or(0, |r| r.start));

    let mut ranges: Vec<Range<u64>> = order.iter().flat_map(|p| p.ranges.iter().cloned()).collect();
    ranges.sort_by_key(|r| r.start);
    if ranges.windows(2).any(|w| w[0].end > w[1].start) {
        return Err(Error::Merge("trajectory ranges overlap".into()));
    }
    // coalesce adjacent ranges
    let mut coalesced: Vec<Range<u64>> = Vec::with_capacity(ranges.len());
    for r in ranges {
        match coalesced.last_mut() {
            Some(last) if last.end == r.start => last.end = r.end,
            _ => coalesced.push(r),
        }
    }

    let side = 2 * first.config.steps + 1;
    let mut total = Partial::empty(first.config.steps, side * side);
    for p in &order {
        total.absorb(&Partial::from_result(p));
    }
    let wall_time = order.iter().map(|p| p.wall_time).sum();
    Ok(total.finish(first.config, coalesced, wall_time))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderMode;
    use crate::evolve::run_trajectory;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn cfg(mode: DisorderMode, zeta: f64, r: u64, n: usize) -> DisorderConfig<f64> {
        DisorderConfig::new(mode, zeta, r, 2024, n)
    }

    #[test]
    fn single_trajectory_ensemble_is_that_trajectory() {
        let c = cfg(DisorderMode::DynamicalSpatial, PI, 1, 6);
        let e = run_ensemble_with(&c, Some(1)).unwrap();
        let t = run_trajectory(&c, 0).unwrap();
        for (s, d) in e.steps.iter().zip(&t) {
            assert_eq!(&s.distribution, d);
            assert_eq!(s.variance, variance(d));
        }
        assert!(e.standard_errors().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn coherent_ensemble_has_no_spread() {
        let c = cfg(DisorderMode::DynamicalSpatial, 0.0, 40, 8);
        let e = run_ensemble_with(&c, Some(2)).unwrap();
        let t = run_trajectory(&c, 0).unwrap();
        for (s, d) in e.steps.iter().zip(&t) {
            assert_abs_diff_eq!(s.variance, variance(d), epsilon = 1e-12);
        }
        assert!(e.standard_errors().iter().all(|x| *x < 1e-12));
    }

    #[test]
    fn averaged_distributions_are_normalized() {
        let c = cfg(DisorderMode::StaticSpatial, PI, 37, 7);
        let e = run_ensemble_with(&c, Some(3)).unwrap();
        assert_eq!(e.trajectories(), 37);
        assert_eq!(e.steps[0].variance, 0.0);
        for s in &e.steps {
            assert_abs_diff_eq!(s.distribution.total(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn merge_of_halves_equals_whole() {
        let c = cfg(DisorderMode::DynamicalUniform, PI, 40, 6);
        let whole = run_ensemble_with(&c, Some(2)).unwrap();
        let a = run_ensemble_range(&c, 0..25, Some(1)).unwrap();
        let b = run_ensemble_range(&c, 25..40, Some(1)).unwrap();
        let merged = merge_results(&[b.clone(), a.clone()]).unwrap();
        assert_eq!(merged.ranges, vec![0..40]);
        for (m, w) in merged.steps.iter().zip(&whole.steps) {
            assert_abs_diff_eq!(m.variance, w.variance, epsilon = 1e-12);
            for (x, y) in m.distribution.as_slice().iter().zip(w.distribution.as_slice()) {
                assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
            }
        }
        for (x, y) in merged.standard_errors().iter().zip(whole.standard_errors()) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }

        let alone = merge_results(std::slice::from_ref(&whole)).unwrap();
        assert!(alone.same_numbers(&whole));

        assert!(merge_results(&[a.clone(), a.clone()]).is_err());
        let other = run_ensemble_range(&cfg(DisorderMode::DynamicalUniform, 1.0, 40, 6), 25..40, Some(1)).unwrap();
        assert!(merge_results(&[a, other]).is_err());
        assert!(merge_results::<f64>(&[]).is_err());
    }

    #[test]
    fn bad_inputs_are_reported() {
        let c = cfg(DisorderMode::DynamicalSpatial, 4.0, 4, 3);
        assert_eq!(run_ensemble(&c).unwrap_err(), Error::ZetaOutOfRange(4.0));
        let c = cfg(DisorderMode::DynamicalSpatial, 1.0, 4, 3);
        assert!(run_ensemble_with(&c, Some(0)).is_err());
        assert!(run_ensemble_range(&c, 3..3, None).is_err());
    }
}
