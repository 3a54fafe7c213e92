mod common;

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use num_complex::Complex64;
use qwalk_core::{
    exact_run, exact_step_density, run_ensemble_with, run_trajectory, variance, DampingFactors, DensityState,
    DisorderConfig, DisorderMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(mode: DisorderMode, zeta: f64, r: u64, n: usize) -> DisorderConfig<f64> {
    DisorderConfig::new(mode, zeta, r, 77, n)
}

#[test]
fn damping_factors_match_quadrature() {
    for zeta in [0.0, 0.3, PI / 2.0, 2.0, PI] {
        // same site, H/V: <exp(-i phi)>
        let (re, im) = common::phase_average(-1.0, zeta);
        // different sites: <exp(-i phi/2)> <exp(+-i phi'/2)>
        let (hre, him) = common::phase_average(-0.5, zeta);
        let cross = Complex64::new(hre, him) * Complex64::new(hre, -him);
        let cross_flip = Complex64::new(hre, him) * Complex64::new(hre, him);

        let s = DampingFactors::for_mode(DisorderMode::DynamicalSpatial, zeta).unwrap();
        assert_abs_diff_eq!(s.same_site_flip, re, epsilon = 1e-10);
        assert_abs_diff_eq!(im, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.cross_site_same_coin, cross.re, epsilon = 1e-10);
        assert_abs_diff_eq!(s.cross_site_flip, cross_flip.re, epsilon = 1e-10);
        assert_abs_diff_eq!(cross_flip.im, 0.0, epsilon = 1e-10);

        let u = DampingFactors::for_mode(DisorderMode::DynamicalUniform, zeta).unwrap();
        assert_abs_diff_eq!(u.same_site_flip, re, epsilon = 1e-10);
        assert_abs_diff_eq!(u.cross_site_flip, re, epsilon = 1e-10);
        assert_eq!(u.cross_site_same_coin, 1.0);
    }
}

#[test]
fn cross_site_factor_matches_monte_carlo() {
    let zeta = PI;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 1_000_000;
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..draws {
        let a: f64 = rng.random_range(-zeta..=zeta);
        let b: f64 = rng.random_range(-zeta..=zeta);
        acc += Complex64::from_polar(1.0, -(a - b) / 2.0);
    }
    acc /= draws as f64;
    let f = DampingFactors::for_mode(DisorderMode::DynamicalSpatial, zeta).unwrap();
    assert_abs_diff_eq!(f.cross_site_same_coin, 0.405_284_734_569_351, epsilon = 1e-12);
    // the real part has standard deviation below 1/sqrt(2 draws)
    assert!((acc.re - f.cross_site_same_coin).abs() < 5.0 / (draws as f64).sqrt());
    assert!(acc.im.abs() < 5.0 / (draws as f64).sqrt());
}

#[test]
fn coherent_trajectory_matches_dense_reference_at_twenty_steps() {
    let (vs, p) = common::dense_coherent_walk(20);
    let snaps = run_trajectory(&cfg(DisorderMode::None, 0.0, 1, 20), 0).unwrap();
    for (n, snap) in snaps.iter().enumerate() {
        assert_abs_diff_eq!(variance(snap), vs[n], epsilon = 1e-10);
    }
    let last = snaps.last().unwrap();
    for a in 0..41 {
        for b in 0..41 {
            assert_abs_diff_eq!(last.at(a as i32 - 20, b as i32 - 20), p[a][b], epsilon = 1e-13);
        }
    }
}

#[test]
fn coherent_density_matches_trajectory_at_eight_steps() {
    let c = cfg(DisorderMode::None, 0.0, 1, 8);
    let exact = exact_run(&c, 8).unwrap();
    let snaps = run_trajectory(&c, 0).unwrap();
    for (e, t) in exact.distributions.iter().zip(&snaps) {
        for ((_, a), (_, b)) in e.iter().zip(t.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}

#[test]
fn channel_preserves_trace_hermiticity_and_positivity() {
    for (mode, zeta) in [
        (DisorderMode::DynamicalSpatial, PI),
        (DisorderMode::DynamicalSpatial, 1.0),
        (DisorderMode::DynamicalUniform, 2.5),
        (DisorderMode::None, 0.0),
    ] {
        let c = cfg(mode, zeta, 1, 3);
        let mut rho = DensityState::initial(3);
        let mut purity = rho.purity();
        for _ in 0..3 {
            rho = exact_step_density(rho, &c).unwrap();
            assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(rho.trace().im, 0.0, epsilon = 1e-10);
            assert!(rho.hermiticity_error() <= 1e-12);
            let p = rho.purity();
            if zeta > 0.0 && mode != DisorderMode::None {
                assert!(p <= purity + 1e-12, "purity rose from {purity} to {p}");
            } else {
                assert_abs_diff_eq!(p, purity, epsilon = 1e-12);
            }
            purity = p;
        }
        let dim = rho.dim();
        let m = DMatrix::from_fn(dim, dim, |r, c| rho.get(r, c));
        let min = m.symmetric_eigenvalues().min();
        assert!(min >= -1e-10, "{mode}: smallest eigenvalue {min}");
    }
}

#[test]
fn monte_carlo_converges_to_the_averaged_channel() {
    let r = 20_000u64;
    for mode in [DisorderMode::DynamicalSpatial, DisorderMode::DynamicalUniform] {
        let c = cfg(mode, PI, r, 5);
        let exact = exact_run(&c, 5).unwrap();
        let mc = run_ensemble_with(&c, None).unwrap();
        for n in 0..=5 {
            let e = &exact.distributions[n];
            let m = &mc.steps[n].distribution;
            for (site, p) in e.iter() {
                let tol = 5.0 * (p * (1.0 - p) / r as f64).max(0.0).sqrt() + 1e-9;
                let got = m.get(site);
                assert!((got - p).abs() <= tol, "{mode} n={n} {site}: mc {got} exact {p} tol {tol}");
            }
        }
    }
}
