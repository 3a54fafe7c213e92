//! Observables: site distributions, spread, power-law and exponential fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{SiteIndex, WalkState};
use crate::scalar::Real;

/// Site probabilities on the square `|i|, |j| <= half_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution2D<T> {
    step: usize,
    half_width: usize,
    probs: Vec<T>,
}

impl<T: Real> Distribution2D<T> {
    pub fn zeros(step: usize, half_width: usize) -> Self {
        let side = 2 * half_width + 1;
        Distribution2D {
            step,
            half_width,
            probs: vec![T::zero(); side * side],
        }
    }

    /// Coin-traced probabilities of `state` on a square of the given
    /// half-width. Fails if the state reaches outside it.
    pub fn from_state(state: &WalkState<T>, half_width: usize) -> Result<Self> {
        let mut d = Self::zeros(state.step_count(), half_width);
        for (site, a) in state.iter() {
            let idx = d.index(site).ok_or(Error::LatticeTooSmall {
                half_width,
                step: state.step_count(),
            })?;
            d.probs[idx] = a.probability();
        }
        Ok(d)
    }

    /// Builds a distribution from `(site, p)` entries. Sites may repeat;
    /// their probabilities add.
    pub fn from_entries<I>(step: usize, half_width: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (SiteIndex, T)>,
    {
        let mut d = Self::zeros(step, half_width);
        for (site, p) in entries {
            let idx = d.index(site).ok_or(Error::LatticeTooSmall { half_width, step })?;
            d.probs[idx] = d.probs[idx] + p;
        }
        Ok(d)
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    fn index(&self, site: SiteIndex) -> Option<usize> {
        let r = self.half_width as i64;
        let (i, j) = (site.i as i64, site.j as i64);
        if i.abs() > r || j.abs() > r {
            return None;
        }
        Some(((i + r) as usize) * self.side() + (j + r) as usize)
    }

    fn site_at(&self, idx: usize) -> SiteIndex {
        let r = self.half_width as i32;
        let side = self.side();
        SiteIndex::new((idx / side) as i32 - r, (idx % side) as i32 - r)
    }

    /// Probability at `site`; zero outside the grid.
    pub fn get(&self, site: SiteIndex) -> T {
        self.index(site).map_or(T::zero(), |k| self.probs[k])
    }

    pub fn at(&self, i: i32, j: i32) -> T {
        self.get(SiteIndex::new(i, j))
    }

    /// All grid cells in ascending `(i, j)` order, zeros included.
    pub fn iter(&self) -> impl Iterator<Item = (SiteIndex, T)> + '_ {
        self.probs.iter().enumerate().map(|(k, p)| (self.site_at(k), *p))
    }

    /// Cells with strictly positive probability, in ascending `(i, j)` order.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (SiteIndex, T)> + '_ {
        self.iter().filter(|(_, p)| *p > T::zero())
    }

    pub fn total(&self) -> T {
        self.probs.iter().copied().sum()
    }

    pub fn max(&self) -> T {
        self.probs.iter().fold(T::zero(), |m, p| m.max(*p))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.probs
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.probs
    }

    /// Largest `|p(i, j) - p(-i, j)|` and `|p(i, j) - p(i, -j)|`.
    pub fn reflection_asymmetry(&self) -> (T, T) {
        let mut dx = T::zero();
        let mut dy = T::zero();
        for (s, p) in self.iter() {
            dx = dx.max((p - self.at(-s.i, s.j)).abs());
            dy = dy.max((p - self.at(s.i, -s.j)).abs());
        }
        (dx, dy)
    }
}

/// Site distribution of a pure state, on the smallest square holding it
/// and at least `|i|, |j| <= n`.
pub fn distribution<T: Real>(state: &WalkState<T>) -> Distribution2D<T> {
    let half_width = (state.radius() as usize).max(state.step_count());
    Distribution2D::from_state(state, half_width).expect("grid sized to the support")
}

/// Mean position `sum p r`.
pub fn mean_position<T: Real>(dist: &Distribution2D<T>) -> (T, T) {
    dist.iter_nonzero().fold((T::zero(), T::zero()), |(mx, my), (s, p)| {
        (mx + p * T::lit(s.i as f64), my + p * T::lit(s.j as f64))
    })
}

/// Spread `sum p |r - mu|^2` about the mean position.
pub fn variance<T: Real>(dist: &Distribution2D<T>) -> T {
    let (mx, my) = mean_position(dist);
    dist.iter_nonzero()
        .map(|(s, p)| {
            let dx = T::lit(s.i as f64) - mx;
            let dy = T::lit(s.j as f64) - my;
            p * (dx * dx + dy * dy)
        })
        .sum()
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    pub points: usize,
}

pub fn least_squares<T: Real>(xs: &[T], ys: &[T]) -> Result<LineFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::Fit("x and y lengths differ".into()));
    }
    if xs.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", xs.len())));
    }
    let n = T::from_count(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|x| (*x - mx) * (*x - mx)).sum();
    let sxy: T = xs.iter().zip(ys).map(|(x, y)| (*x - mx) * (*y - my)).sum();
    if sxx.is_zero() {
        return Err(Error::Fit("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: T = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = *y - (intercept + slope * *x);
            r * r
        })
        .sum();
    let ss_tot: T = ys.iter().map(|y| (*y - my) * (*y - my)).sum();
    let r_squared = if ss_tot > T::zero() {
        T::one() - ss_res / ss_tot
    } else if ss_res.is_zero() {
        T::one()
    } else {
        T::zero()
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        points: xs.len(),
    })
}

/// Power law `V = c n^alpha` fitted on `n_lo..=n_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit<T> {
    pub exponent: T,
    pub prefactor: T,
    pub n_lo: usize,
    pub n_hi: usize,
    pub r_squared: T,
}

/// Fits `log V` against `log n`. `series[n]` is the spread after `n` steps.
pub fn fit_scaling_exponent<T: Real>(series: &[T], n_lo: usize, n_hi: usize) -> Result<ScalingFit<T>> {
    if n_lo < 1 {
        return Err(Error::Fit("scaling fit needs n_lo >= 1".into()));
    }
    if n_hi <= n_lo || n_hi >= series.len() {
        return Err(Error::Fit(format!(
            "scaling window [{n_lo}, {n_hi}] is not inside the series (last step {})",
            series.len().saturating_sub(1)
        )));
    }
    let mut xs = Vec::with_capacity(n_hi - n_lo + 1);
    let mut ys = Vec::with_capacity(n_hi - n_lo + 1);
    for (n, v) in series.iter().enumerate().take(n_hi + 1).skip(n_lo) {
        if !(*v > T::zero()) {
            return Err(Error::Fit(format!("non-positive spread {v} at n = {n}")));
        }
        xs.push(T::from_count(n).ln());
        ys.push(v.ln());
    }
    let line = least_squares(&xs, &ys)?;
    Ok(ScalingFit {
        exponent: line.slope,
        prefactor: line.intercept.exp(),
        n_lo,
        n_hi,
        r_squared: line.r_squared,
    })
}

/// A 1D profile indexed by coordinate `-half_width..=half_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisProfile<T> {
    pub half_width: usize,
    pub values: Vec<T>,
}

impl<T: Real> AxisProfile<T> {
    pub fn from_fn(half_width: usize, f: impl Fn(i32) -> T) -> Self {
        let r = half_width as i32;
        AxisProfile {
            half_width,
            values: (-r..=r).map(f).collect(),
        }
    }

    pub fn get(&self, coord: i32) -> T {
        let k = coord as i64 + self.half_width as i64;
        if k < 0 || k as usize >= self.values.len() {
            T::zero()
        } else {
            self.values[k as usize]
        }
    }

    /// `(coordinate, value)` pairs in ascending coordinate order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, T)> + '_ {
        let r = self.half_width as i32;
        self.values.iter().enumerate().map(move |(k, v)| (k as i32 - r, *v))
    }
}

/// Cuts through the origin: `x` is `p(i, 0)`, `y` is `p(0, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisCuts<T> {
    pub x: AxisProfile<T>,
    pub y: AxisProfile<T>,
}

pub fn axis_cuts<T: Real>(dist: &Distribution2D<T>) -> AxisCuts<T> {
    let r = dist.half_width();
    AxisCuts {
        x: AxisProfile::from_fn(r, |i| dist.at(i, 0)),
        y: AxisProfile::from_fn(r, |j| dist.at(0, j)),
    }
}

/// Exponential fit of one axis profile, both signs fitted separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileFit<T> {
    /// Mean of the two one-sided slopes of `ln p` against `|coordinate|`.
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    pub positive: LineFit<T>,
    pub negative: LineFit<T>,
}

/// Minimum number of positive points each side of a profile needs.
pub const MIN_LOCALIZATION_POINTS: usize = 4;

/// Fits `ln p` against `|coordinate|` over `d_lo <= |coordinate| <= d_hi`
/// on each side of the origin. Cells with `p = 0` (parity-forbidden sites)
/// are skipped.
pub fn fit_localization<T: Real>(profile: &AxisProfile<T>, d_lo: usize, d_hi: usize) -> Result<ProfileFit<T>> {
    if d_hi < d_lo {
        return Err(Error::Fit(format!("empty localization window [{d_lo}, {d_hi}]")));
    }
    let side = |sign: i32| -> Result<LineFit<T>> {
        let (xs, ys): (Vec<T>, Vec<T>) = (d_lo..=d_hi)
            .map(|d| (d, profile.get(sign * d as i32)))
            .filter(|(_, p)| *p > T::zero())
            .map(|(d, p)| (T::from_count(d), p.ln()))
            .unzip();
        if xs.len() < MIN_LOCALIZATION_POINTS {
            return Err(Error::Fit(format!(
                "only {} positive points with |coordinate| in [{d_lo}, {d_hi}] on the {} side; need {MIN_LOCALIZATION_POINTS}",
                xs.len(),
                if sign > 0 { "positive" } else { "negative" },
            )));
        }
        least_squares(&xs, &ys)
    };
    let positive = side(1)?;
    let negative = side(-1)?;
    let half = T::lit(0.5);
    Ok(ProfileFit {
        slope: (positive.slope + negative.slope) * half,
        intercept: (positive.intercept + negative.intercept) * half,
        r_squared: (positive.r_squared + negative.r_squared) * half,
        positive,
        negative,
    })
}

/// Exponential-decay fits of both axis cuts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationFit<T> {
    pub x: ProfileFit<T>,
    pub y: ProfileFit<T>,
    pub d_lo: usize,
    pub d_hi: usize,
}

impl<T: Real> LocalizationFit<T> {
    pub fn mean_slope(&self) -> T {
        (self.x.slope + self.y.slope) * T::lit(0.5)
    }

    /// Negative slope and `R^2 >= r2_min` on both axes.
    pub fn is_localized(&self, r2_min: T) -> bool {
        [self.x, self.y]
            .iter()
            .all(|f| f.slope < T::zero() && f.r_squared >= r2_min)
    }
}

pub fn fit_localization_cuts<T: Real>(cuts: &AxisCuts<T>, d_lo: usize, d_hi: usize) -> Result<LocalizationFit<T>> {
    Ok(LocalizationFit {
        x: fit_localization(&cuts.x, d_lo, d_hi)?,
        y: fit_localization(&cuts.y, d_lo, d_hi)?,
        d_lo,
        d_hi,
    })
}
