//! Random phase matrices for the three disorder regimes.
//!
//! Every trajectory owns a [`PhaseSource`] seeded from
//! [`derive_trajectory_seed`]. Dynamical modes draw from a ChaCha8 stream in
//! ascending site order. Static phases are drawn lazily from a per-site
//! ChaCha8 stream keyed by `(i, j)`, so a site's phase does not depend on when
//! or in what order it was first reached.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::SiteIndex;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderMode {
    /// No dephasing at all.
    None,
    /// Independent phase per site, redrawn every step.
    DynamicalSpatial,
    /// Independent phase per site, fixed for the whole trajectory.
    StaticSpatial,
    /// One phase per step shared by every site.
    DynamicalUniform,
}

impl DisorderMode {
    pub const ALL: [DisorderMode; 4] = [
        DisorderMode::None,
        DisorderMode::DynamicalSpatial,
        DisorderMode::StaticSpatial,
        DisorderMode::DynamicalUniform,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DisorderMode::None => "none",
            DisorderMode::DynamicalSpatial => "dynamical_spatial",
            DisorderMode::StaticSpatial => "static_spatial",
            DisorderMode::DynamicalUniform => "dynamical_uniform",
        }
    }
}

impl fmt::Display for DisorderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DisorderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "none" => Ok(DisorderMode::None),
            "dynamical_spatial" | "spatial" => Ok(DisorderMode::DynamicalSpatial),
            "static_spatial" | "static" => Ok(DisorderMode::StaticSpatial),
            "dynamical_uniform" | "uniform" => Ok(DisorderMode::DynamicalUniform),
            other => Err(Error::InvalidConfig(format!(
                "unknown disorder mode `{other}` (expected none, dynamical_spatial, static_spatial or dynamical_uniform)"
            ))),
        }
    }
}

/// Everything needed to reproduce an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderConfig<T> {
    pub mode: DisorderMode,
    /// Phases are drawn from `Uniform[-zeta, zeta]`, `0 <= zeta <= pi`.
    pub zeta: T,
    pub realizations: u64,
    pub master_seed: u64,
    pub steps: usize,
}

impl<T: Real> DisorderConfig<T> {
    pub fn new(mode: DisorderMode, zeta: T, realizations: u64, master_seed: u64, steps: usize) -> Self {
        DisorderConfig {
            mode,
            zeta,
            realizations,
            master_seed,
            steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zeta >= T::zero() && self.zeta <= T::PI()) {
            return Err(Error::ZetaOutOfRange(self.zeta.to_f64().unwrap_or(f64::NAN)));
        }
        if self.realizations == 0 {
            return Err(Error::InvalidConfig("realizations must be at least 1".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be at least 1".into()));
        }
        if self.steps > i32::MAX as usize / 2 {
            return Err(Error::InvalidConfig(format!("steps = {} is too large", self.steps)));
        }
        Ok(())
    }

    /// True when no phase ever differs from zero.
    pub fn is_coherent(&self) -> bool {
        self.mode == DisorderMode::None || self.zeta.is_zero()
    }
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
const STATIC_SALT: u64 = 0x5374_6174_6963_5068;

/// SplitMix64 output function; a bijection on `u64`.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trajectory `index` under `master_seed`.
///
/// This is the SplitMix64 generator evaluated at position `index + 1` of the
/// sequence started at `master_seed`:
/// `mix64(master_seed + (index + 1) * 0x9e3779b97f4a7c15)` with wrapping
/// arithmetic. The increment is odd and `mix64` is bijective, so distinct
/// indices always give distinct seeds. The formula is part of the stable
/// output contract.
pub fn derive_trajectory_seed(master_seed: u64, trajectory_index: u64) -> u64 {
    mix64(master_seed.wrapping_add(trajectory_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

fn site_stream(site: SiteIndex) -> u64 {
    ((site.i as u32 as u64) << 32) | site.j as u32 as u64
}

#[derive(Debug, Clone, PartialEq)]
enum PhaseField<T> {
    Constant(T),
    PerSite(BTreeMap<SiteIndex, T>),
}

/// Dephasing phases for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix<T> {
    step: usize,
    field: PhaseField<T>,
}

impl<T: Real> PhaseMatrix<T> {
    pub fn zero(step: usize) -> Self {
        Self::uniform(step, T::zero())
    }

    /// Same phase at every site of the plane.
    pub fn uniform(step: usize, phase: T) -> Self {
        PhaseMatrix {
            step,
            field: PhaseField::Constant(phase),
        }
    }

    /// Phases given only on the listed sites.
    pub fn per_site<I: IntoIterator<Item = (SiteIndex, T)>>(step: usize, phases: I) -> Self {
        PhaseMatrix {
            step,
            field: PhaseField::PerSite(phases.into_iter().collect()),
        }
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn get(&self, site: SiteIndex) -> Option<T> {
        match &self.field {
            PhaseField::Constant(p) => Some(*p),
            PhaseField::PerSite(map) => map.get(&site).copied(),
        }
    }

    /// Largest `|phi|` stored.
    pub fn max_abs(&self) -> T {
        match &self.field {
            PhaseField::Constant(p) => p.abs(),
            PhaseField::PerSite(map) => map.values().fold(T::zero(), |m, p| m.max(p.abs())),
        }
    }

    pub fn is_spatially_constant(&self) -> bool {
        matches!(self.field, PhaseField::Constant(_))
    }
}

/// Phase generator owned by a single trajectory.
#[derive(Debug, Clone)]
pub struct PhaseSource<T: Real> {
    mode: DisorderMode,
    /// `None` when every phase is zero.
    zeta: Option<T>,
    rng: ChaCha8Rng,
    static_seed: u64,
    static_cache: HashMap<SiteIndex, T>,
}

impl<T: Real> PhaseSource<T> {
    /// Source for trajectory `index` of `config`.
    pub fn for_trajectory(config: &DisorderConfig<T>, index: u64) -> Result<Self> {
        Self::from_seed(config, derive_trajectory_seed(config.master_seed, index))
    }

    pub fn from_seed(config: &DisorderConfig<T>, seed: u64) -> Result<Self> {
        if !(config.zeta >= T::zero() && config.zeta <= T::PI()) {
            return Err(Error::ZetaOutOfRange(config.zeta.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(PhaseSource {
            mode: config.mode,
            zeta: (!config.is_coherent()).then_some(config.zeta),
            rng: ChaCha8Rng::seed_from_u64(seed),
            static_seed: mix64(seed ^ STATIC_SALT),
            static_cache: HashMap::new(),
        })
    }

    /// Phases for `step`, covering every site in `support`.
    pub fn phases_for_step<I>(&mut self, step: usize, support: I) -> PhaseMatrix<T>
    where
        I: IntoIterator<Item = SiteIndex>,
    {
        let Some(zeta) = self.zeta else {
            return PhaseMatrix::zero(step);
        };
        let law = |rng: &mut ChaCha8Rng| rng.random_range(-zeta..=zeta);
        match self.mode {
            DisorderMode::None => PhaseMatrix::zero(step),
            DisorderMode::DynamicalUniform => PhaseMatrix::uniform(step, law(&mut self.rng)),
            DisorderMode::DynamicalSpatial => {
                // BTreeMap::from_iter sorts, but the draws must follow a fixed
                // order too, so sort the support first
                let mut sites: Vec<_> = support.into_iter().collect();
                sites.sort_unstable();
                sites.dedup();
                let rng = &mut self.rng;
                PhaseMatrix::per_site(step, sites.into_iter().map(|s| (s, law(rng))))
            }
            DisorderMode::StaticSpatial => {
                let seed = self.static_seed;
                let cache = &mut self.static_cache;
                let phases = support
                    .into_iter()
                    .map(|s| {
                        let phi = *cache.entry(s).or_insert_with(|| {
                            let mut rng = ChaCha8Rng::seed_from_u64(seed);
                            rng.set_stream(site_stream(s));
                            law(&mut rng)
                        });
                        (s, phi)
                    })
                    .collect::<Vec<_>>();
                PhaseMatrix::per_site(step, phases)
            }
        }
    }
}
