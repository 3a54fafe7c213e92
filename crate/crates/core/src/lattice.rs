//! Walker state on the unbounded square lattice with a two-level coin.
//!
//! The state is a sparse map from lattice site to the pair of coin
//! amplitudes `(a_H, a_V)`. Sites absent from the map carry zero amplitude.
//! Nothing is ever pruned by magnitude; a site only disappears when both of
//! its amplitudes are exactly zero.
//!
//! Conventions:
//! - coin: `(a_H, a_V) -> ((a_H + a_V)/sqrt2, (a_H - a_V)/sqrt2)`
//! - x shift: `H` moves to `i - 1`, `V` moves to `i + 1`
//! - y shift: `H` moves to `j - 1`, `V` moves to `j + 1`
//! - dephasing: `H` is the `+1` eigenvector of `sigma_z`, so a site phase
//!   `phi` multiplies `a_H` by `exp(-i phi/2)` and `a_V` by `exp(+i phi/2)`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::disorder::PhaseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Integer lattice coordinate `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SiteIndex {
    pub i: i32,
    pub j: i32,
}

impl SiteIndex {
    pub const ORIGIN: SiteIndex = SiteIndex { i: 0, j: 0 };

    pub const fn new(i: i32, j: i32) -> Self {
        SiteIndex { i, j }
    }

    #[inline]
    fn offset(self, di: i32, dj: i32) -> Self {
        SiteIndex::new(self.i + di, self.j + dj)
    }

    /// Chebyshev distance from the origin.
    pub fn radius(self) -> u32 {
        self.i.unsigned_abs().max(self.j.unsigned_abs())
    }
}

impl fmt::Display for SiteIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// Coin amplitudes at one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinAmplitudes<T> {
    pub h: Complex<T>,
    pub v: Complex<T>,
}

impl<T: Real> CoinAmplitudes<T> {
    pub fn new(h: Complex<T>, v: Complex<T>) -> Self {
        CoinAmplitudes { h, v }
    }

    /// Site probability, the coin traced out.
    #[inline]
    pub fn probability(&self) -> T {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        [self.h.re, self.h.im, self.v.re, self.v.im].iter().all(|x| x.is_finite())
    }

    fn is_zero(&self) -> bool {
        self.h.is_zero() && self.v.is_zero()
    }
}

impl<T: Real> Default for CoinAmplitudes<T> {
    fn default() -> Self {
        CoinAmplitudes {
            h: Complex::zero(),
            v: Complex::zero(),
        }
    }
}

/// Pure state of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState<T> {
    amplitudes: BTreeMap<SiteIndex, CoinAmplitudes<T>>,
    step: usize,
}

impl<T: Real> WalkState<T> {
    /// Walker at the origin with coin `(|H> + i|V>)/sqrt2`, step 0.
    pub fn initial() -> Self {
        let a = T::FRAC_1_SQRT_2();
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(
            SiteIndex::ORIGIN,
            CoinAmplitudes::new(Complex::new(a, T::zero()), Complex::new(T::zero(), a)),
        );
        WalkState { amplitudes, step: 0 }
    }

    /// Builds a state from explicit site amplitudes. No normalization is
    /// performed.
    pub fn from_sites<I>(sites: I, step: usize) -> Self
    where
        I: IntoIterator<Item = (SiteIndex, CoinAmplitudes<T>)>,
    {
        let amplitudes = sites.into_iter().filter(|(_, a)| !a.is_zero()).collect();
        WalkState { amplitudes, step }
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    pub(crate) fn advance_step_count(&mut self) {
        self.step += 1;
    }

    pub fn get(&self, site: SiteIndex) -> CoinAmplitudes<T> {
        self.amplitudes.get(&site).copied().unwrap_or_default()
    }

    /// Occupied sites in ascending `(i, j)` order.
    pub fn sites(&self) -> impl Iterator<Item = SiteIndex> + '_ {
        self.amplitudes.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SiteIndex, &CoinAmplitudes<T>)> + '_ {
        self.amplitudes.iter().map(|(s, a)| (*s, a))
    }

    pub fn occupied(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.values().map(CoinAmplitudes::probability).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.values().all(CoinAmplitudes::is_finite)
    }

    /// Largest Chebyshev radius among occupied sites.
    pub fn radius(&self) -> u32 {
        self.amplitudes.keys().map(|s| s.radius()).max().unwrap_or(0)
    }

    /// First occupied site violating `|i|, |j| <= n` or the parity rule
    /// `i = j = n (mod 2)`, if any.
    pub fn support_violation(&self) -> Option<SiteIndex> {
        let n = self.step as i64;
        self.amplitudes.keys().copied().find(|s| {
            let (i, j) = (s.i as i64, s.j as i64);
            i.abs() > n || j.abs() > n || (i - n).rem_euclid(2) != 0 || (j - n).rem_euclid(2) != 0
        })
    }

    /// Hadamard coin at every site.
    pub fn apply_coin(&mut self) {
        let s = T::FRAC_1_SQRT_2();
        for a in self.amplitudes.values_mut() {
            let (h, v) = (a.h, a.v);
            a.h = (h + v).scale(s);
            a.v = (h - v).scale(s);
        }
        self.amplitudes.retain(|_, a| !a.is_zero());
    }

    pub fn apply_shift_x(&mut self) {
        self.conditional_shift((-1, 0), (1, 0));
    }

    pub fn apply_shift_y(&mut self) {
        self.conditional_shift((0, -1), (0, 1));
    }

    fn conditional_shift(&mut self, dh: (i32, i32), dv: (i32, i32)) {
        let old = std::mem::take(&mut self.amplitudes);
        for (site, a) in old {
            // the shift is a permutation, so every target receives at most
            // one H and one V contribution
            if !a.h.is_zero() {
                self.amplitudes.entry(site.offset(dh.0, dh.1)).or_default().h = a.h;
            }
            if !a.v.is_zero() {
                self.amplitudes.entry(site.offset(dv.0, dv.1)).or_default().v = a.v;
            }
        }
    }

    /// Site-diagonal `exp(-i phi sigma_z / 2)`. Every occupied site must
    /// have a phase in `phases`.
    pub fn apply_dephasing(&mut self, phases: &PhaseMatrix<T>) -> Result<()> {
        let half = T::lit(0.5);
        for (site, a) in self.amplitudes.iter_mut() {
            let phi = phases.get(*site).ok_or(Error::MissingPhase {
                i: site.i,
                j: site.j,
                step: phases.step(),
            })?;
            if phi.is_zero() {
                continue;
            }
            let rot = Complex::from_polar(T::one(), -phi * half);
            a.h = a.h * rot;
            a.v = a.v * rot.conj();
        }
        Ok(())
    }
}

impl<T: Real> Default for WalkState<T> {
    fn default() -> Self {
        Self::initial()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    type C = Complex<f64>;

    fn basis(site: SiteIndex, h: C, v: C) -> WalkState<f64> {
        WalkState::from_sites([(site, CoinAmplitudes::new(h, v))], 0)
    }

    #[test]
    fn initial_state_matches_source_coin() {
        let s = WalkState::<f64>::initial();
        assert_eq!(s.occupied(), 1);
        assert_eq!(s.step_count(), 0);
        let a = s.get(SiteIndex::ORIGIN);
        assert_abs_diff_eq!(a.probability(), 1.0, epsilon = 1e-15);
        // a_V = i a_H
        let ratio = a.v / a.h;
        assert_abs_diff_eq!(ratio.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ratio.im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn coin_on_pure_h() {
        let mut s = basis(SiteIndex::ORIGIN, C::new(1.0, 0.0), C::new(0.0, 0.0));
        s.apply_coin();
        let a = s.get(SiteIndex::ORIGIN);
        assert_abs_diff_eq!(a.h.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(a.v.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_eq!(a.h.im, 0.0);
    }

    #[test]
    fn coin_on_initial_state() {
        let mut s = WalkState::<f64>::initial();
        s.apply_coin();
        let a = s.get(SiteIndex::ORIGIN);
        assert_abs_diff_eq!(a.h.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(a.h.im, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(a.v.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(a.v.im, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn coin_is_an_involution() {
        let mut s = WalkState::<f64>::initial();
        let before = s.get(SiteIndex::ORIGIN);
        s.apply_coin();
        s.apply_coin();
        let after = s.get(SiteIndex::ORIGIN);
        assert_abs_diff_eq!((after.h - before.h).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((after.v - before.v).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn shifts_move_each_polarization() {
        let one = C::new(1.0, 0.0);
        let zero = C::new(0.0, 0.0);

        let mut s = basis(SiteIndex::ORIGIN, one, zero);
        s.apply_shift_x();
        assert_eq!(s.sites().collect::<Vec<_>>(), vec![SiteIndex::new(-1, 0)]);

        let mut s = basis(SiteIndex::ORIGIN, zero, one);
        s.apply_shift_x();
        assert_eq!(s.sites().collect::<Vec<_>>(), vec![SiteIndex::new(1, 0)]);

        let mut s = basis(SiteIndex::ORIGIN, one, zero);
        s.apply_shift_y();
        assert_eq!(s.sites().collect::<Vec<_>>(), vec![SiteIndex::new(0, -1)]);

        let mut s = basis(SiteIndex::ORIGIN, zero, one);
        s.apply_shift_y();
        assert_eq!(s.sites().collect::<Vec<_>>(), vec![SiteIndex::new(0, 1)]);
        assert_eq!(s.get(SiteIndex::new(0, 1)).v, one);
    }

    #[test]
    fn dephasing_by_pi() {
        let (a, b) = (C::new(0.6, 0.0), C::new(0.0, 0.8));
        let mut s = basis(SiteIndex::ORIGIN, a, b);
        let phases = PhaseMatrix::uniform(1, PI);
        s.apply_dephasing(&phases).unwrap();
        let out = s.get(SiteIndex::ORIGIN);
        let mi = C::new(0.0, -1.0);
        assert_abs_diff_eq!((out.h - mi * a).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((out.v - mi.conj() * b).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_phases_are_identity() {
        let mut s = WalkState::<f64>::initial();
        s.apply_coin();
        s.apply_shift_x();
        let before = s.clone();
        s.apply_dephasing(&PhaseMatrix::zero(1)).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn missing_phase_is_an_error() {
        let mut s = WalkState::<f64>::initial();
        let phases = PhaseMatrix::per_site(3, [(SiteIndex::new(2, 2), 0.1)]);
        let err = s.apply_dephasing(&phases).unwrap_err();
        assert_eq!(err, Error::MissingPhase { i: 0, j: 0, step: 3 });
    }

    #[test]
    fn real_states_stay_real_under_coin_and_shifts() {
        let mut s = basis(SiteIndex::ORIGIN, C::new(0.8, 0.0), C::new(-0.6, 0.0));
        for _ in 0..6 {
            s.apply_coin();
            s.apply_shift_x();
            s.apply_coin();
            s.apply_shift_y();
        }
        assert!(s.iter().all(|(_, a)| a.h.im == 0.0 && a.v.im == 0.0));
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn works_in_single_precision() {
        let mut s = WalkState::<f32>::initial();
        s.apply_coin();
        s.apply_shift_x();
        s.apply_coin();
        s.apply_shift_y();
        assert_eq!(s.occupied(), 4);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-6);
    }
}
