//! Exact phase-averaged evolution on a dense density matrix.
//!
//! Small lattices only: the matrix has dimension `2 (2 n_max + 1)^2`. Basis
//! order is site-major, coin-minor: index `((i + r)(2r + 1) + (j + r)) * 2 + c`
//! with `c = 0` for `H` and `c = 1` for `V`.
//!
//! Averaging `exp(-i phi sigma_z / 2)` over `phi ~ Uniform[-zeta, zeta]`
//! multiplies each matrix element by a damping factor. With
//! `sinc(x) = sin x / x`:
//!
//! | mode              | same site, same coin | same site, H/V | different sites |
//! |-------------------|----------------------|----------------|-----------------|
//! | dynamical spatial | 1                    | sinc(zeta)     | sinc(zeta/2)^2  |
//! | dynamical uniform | 1                    | sinc(zeta)     | 1 (same coin), sinc(zeta) (H/V) |
//!
//! Static disorder correlates phases across steps and has no per-step
//! average, so it is rejected.

use num_complex::Complex;
use num_traits::Zero;

use crate::analysis::{variance, Distribution2D};
use crate::disorder::{DisorderConfig, DisorderMode};
use crate::error::{Error, Result};
use crate::lattice::{SiteIndex, WalkState};
use crate::scalar::{sinc, Real};

/// Phase-averaged damping of density-matrix elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingFactors<T> {
    pub same_site_same_coin: T,
    pub same_site_flip: T,
    pub cross_site_same_coin: T,
    pub cross_site_flip: T,
}

impl<T: Real> DampingFactors<T> {
    pub fn for_mode(mode: DisorderMode, zeta: T) -> Result<Self> {
        let one = T::one();
        let f = match mode {
            DisorderMode::None => DampingFactors {
                same_site_same_coin: one,
                same_site_flip: one,
                cross_site_same_coin: one,
                cross_site_flip: one,
            },
            DisorderMode::DynamicalSpatial => {
                let half = sinc(zeta * T::lit(0.5));
                DampingFactors {
                    same_site_same_coin: one,
                    same_site_flip: sinc(zeta),
                    cross_site_same_coin: half * half,
                    cross_site_flip: half * half,
                }
            }
            DisorderMode::DynamicalUniform => DampingFactors {
                same_site_same_coin: one,
                same_site_flip: sinc(zeta),
                cross_site_same_coin: one,
                cross_site_flip: sinc(zeta),
            },
            DisorderMode::StaticSpatial => return Err(Error::UnsupportedMode(mode)),
        };
        Ok(f)
    }

    #[inline]
    pub fn factor(&self, same_site: bool, same_coin: bool) -> T {
        match (same_site, same_coin) {
            (true, true) => self.same_site_same_coin,
            (true, false) => self.same_site_flip,
            (false, true) => self.cross_site_same_coin,
            (false, false) => self.cross_site_flip,
        }
    }
}

/// Dense density matrix on the square `|i|, |j| <= half_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState<T> {
    half_width: usize,
    step: usize,
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DensityState<T> {
    /// `|psi><psi|` for a pure state that fits inside the square.
    pub fn from_pure(state: &WalkState<T>, half_width: usize) -> Result<Self> {
        let side = 2 * half_width + 1;
        let dim = 2 * side * side;
        let mut psi = vec![Complex::zero(); dim];
        for (site, a) in state.iter() {
            let k = site_offset(site, half_width).ok_or(Error::LatticeTooSmall {
                half_width,
                step: state.step_count(),
            })?;
            psi[2 * k] = a.h;
            psi[2 * k + 1] = a.v;
        }
        let mut data = vec![Complex::zero(); dim * dim];
        for (r, row) in data.chunks_exact_mut(dim).enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = psi[r] * psi[c].conj();
            }
        }
        Ok(DensityState {
            half_width,
            step: state.step_count(),
            dim,
            data,
        })
    }

    /// The initial walker on a square of the given half-width.
    pub fn initial(half_width: usize) -> Self {
        Self::from_pure(&WalkState::initial(), half_width).expect("origin is always inside the grid")
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim + col]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).map(|k| self.get(k, k)).fold(Complex::zero(), |a, b| a + b)
    }

    /// `Tr(rho^2)`, which equals the squared Frobenius norm for Hermitian `rho`.
    pub fn purity(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest `|rho_ab - conj(rho_ba)|`.
    pub fn hermiticity_error(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Site probabilities: diagonal summed over the coin.
    pub fn distribution(&self) -> Distribution2D<T> {
        let r = self.half_width as i32;
        let side = 2 * self.half_width + 1;
        let entries = (0..side * side).map(|k| {
            let site = SiteIndex::new((k / side) as i32 - r, (k % side) as i32 - r);
            let p = self.get(2 * k, 2 * k).re + self.get(2 * k + 1, 2 * k + 1).re;
            (site, p)
        });
        Distribution2D::from_entries(self.step, self.half_width, entries).expect("grid matches")
    }

    /// `rho <- U rho U^dagger` for an operator given by its action on a
    /// column vector.
    fn conjugate_by(&mut self, op: impl Fn(&[Complex<T>], &mut [Complex<T>])) {
        let dim = self.dim;
        let mut input = vec![Complex::zero(); dim];
        let mut output = vec![Complex::zero(); dim];
        for c in 0..dim {
            for r in 0..dim {
                input[r] = self.data[r * dim + c];
            }
            op(&input, &mut output);
            for r in 0..dim {
                self.data[r * dim + c] = output[r];
            }
        }
        // (rho U^dagger) row = conj(U conj(row))
        for row in self.data.chunks_exact_mut(dim) {
            for (x, y) in input.iter_mut().zip(row.iter()) {
                *x = y.conj();
            }
            op(&input, &mut output);
            for (y, x) in row.iter_mut().zip(output.iter()) {
                *y = x.conj();
            }
        }
    }

    fn damp(&mut self, factors: &DampingFactors<T>) {
        let dim = self.dim;
        for (r, row) in self.data.chunks_exact_mut(dim).enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                let f = factors.factor(r / 2 == c / 2, r % 2 == c % 2);
                *x = x.scale(f);
            }
        }
    }
}

fn site_offset(site: SiteIndex, half_width: usize) -> Option<usize> {
    let r = half_width as i64;
    let (i, j) = (site.i as i64, site.j as i64);
    if i.abs() > r || j.abs() > r {
        return None;
    }
    Some(((i + r) as usize) * (2 * half_width + 1) + (j + r) as usize)
}

fn dense_coin<T: Real>(x: &[Complex<T>], out: &mut [Complex<T>]) {
    let s = T::FRAC_1_SQRT_2();
    for (src, dst) in x.chunks_exact(2).zip(out.chunks_exact_mut(2)) {
        dst[0] = (src[0] + src[1]).scale(s);
        dst[1] = (src[0] - src[1]).scale(s);
    }
}

/// Conditional shift on the dense vector; `H` moves by `-delta`, `V` by
/// `+delta`, where `delta` is a flat site-index offset. Amplitude pushed off
/// the grid is dropped; callers keep the grid large enough.
fn dense_shift<T: Real>(x: &[Complex<T>], out: &mut [Complex<T>], half_width: usize, along_x: bool) {
    let side = 2 * half_width + 1;
    out.iter_mut().for_each(|z| *z = Complex::zero());
    for k in 0..side * side {
        let (a, b) = (k / side, k % side);
        let coord = if along_x { a } else { b };
        let stride = if along_x { side } else { 1 };
        if coord > 0 {
            out[2 * (k - stride)] = x[2 * k];
        }
        if coord + 1 < side {
            out[2 * (k + stride) + 1] = x[2 * k + 1];
        }
    }
}

/// One averaged step: the walk unitaries by conjugation, then elementwise
/// damping.
pub fn exact_step_density<T: Real>(rho: DensityState<T>, config: &DisorderConfig<T>) -> Result<DensityState<T>> {
    let factors = DampingFactors::for_mode(config.mode, config.zeta)?;
    if rho.step + 1 > rho.half_width {
        return Err(Error::LatticeTooSmall {
            half_width: rho.half_width,
            step: rho.step + 1,
        });
    }
    let mut rho = rho;
    let hw = rho.half_width;
    rho.conjugate_by(dense_coin);
    rho.conjugate_by(|x, out| dense_shift(x, out, hw, true));
    rho.conjugate_by(dense_coin);
    rho.conjugate_by(|x, out| dense_shift(x, out, hw, false));
    rho.damp(&factors);
    rho.step += 1;
    Ok(rho)
}

/// Exact ensemble averages for steps `0..=config.steps`.
#[derive(Debug, Clone)]
pub struct ExactRun<T> {
    pub distributions: Vec<Distribution2D<T>>,
    pub variances: Vec<T>,
    pub final_state: DensityState<T>,
}

/// Evolves the averaged density matrix on the square `|i|, |j| <= n_max`
/// for `config.steps` steps.
pub fn exact_run<T: Real>(config: &DisorderConfig<T>, n_max: usize) -> Result<ExactRun<T>> {
    config.validate()?;
    DampingFactors::for_mode(config.mode, config.zeta)?;
    if config.steps > n_max {
        return Err(Error::LatticeTooSmall {
            half_width: n_max,
            step: config.steps,
        });
    }
    let mut rho = DensityState::initial(n_max);
    let mut distributions = vec![rho.distribution()];
    for _ in 0..config.steps {
        rho = exact_step_density(rho, config)?;
        distributions.push(rho.distribution());
    }
    let variances = distributions.iter().map(variance).collect();
    Ok(ExactRun {
        distributions,
        variances,
        final_state: rho,
    })
}
