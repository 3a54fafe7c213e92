//! Run configuration file.
//!
//! A flat TOML document, schema version 1:
//!
//! ```toml
//! schema_version = 1
//! mode = "dynamical_spatial"   # none | dynamical_spatial | static_spatial | dynamical_uniform
//! zeta = 3.141592653589793     # or a string such as "pi", "pi/2", "0.75*pi"
//! steps = 20
//! realizations = 500
//! seed = 42                    # required, 0 <= seed < 2^63
//! engine = "trajectory"        # trajectory | exact
//! threads = 4                  # optional; machine default when absent
//! out_dir = "qwalk-out"
//! fit.n_lo = 10                # optional fit windows
//! fit.n_hi = 20
//! fit.d_lo = 2
//! fit.d_hi = 14
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qwalk_core::{ConfigF64, DisorderConfig, DisorderMode};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest lattice half-width the dense density-matrix engine accepts.
pub const EXACT_MAX_STEPS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Trajectory,
    Exact,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Trajectory => "trajectory",
            Engine::Exact => "exact",
        })
    }
}

impl FromStr for Engine {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trajectory" => Ok(Engine::Trajectory),
            "exact" | "oracle" => Ok(Engine::Exact),
            other => Err(CliError::Config(format!("unknown engine `{other}` (expected trajectory or exact)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindows {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_lo: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_hi: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_lo: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_hi: Option<usize>,
}

/// Fit windows with defaults filled in for a run of `steps` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedWindows {
    pub n_lo: usize,
    pub n_hi: usize,
    pub d_lo: usize,
    pub d_hi: usize,
}

impl FitWindows {
    /// Scaling over `[10, N]`, localization over `[2, N - 6]`.
    pub fn resolve(&self, steps: usize) -> ResolvedWindows {
        ResolvedWindows {
            n_lo: self.n_lo.unwrap_or(10),
            n_hi: self.n_hi.unwrap_or(steps),
            d_lo: self.d_lo.unwrap_or(2),
            d_hi: self.d_hi.unwrap_or(steps.saturating_sub(6)),
        }
    }

    /// Keys set in `other` replace ours.
    pub fn overlay(&mut self, other: &FitWindows) {
        self.n_lo = other.n_lo.or(self.n_lo);
        self.n_hi = other.n_hi.or(self.n_hi);
        self.d_lo = other.d_lo.or(self.d_lo);
        self.d_hi = other.d_hi.or(self.d_hi);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunManifest {
    pub schema_version: u32,
    pub mode: DisorderMode,
    #[serde(deserialize_with = "deserialize_zeta")]
    pub zeta: f64,
    pub steps: usize,
    pub realizations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub engine: Engine,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    pub fit: FitWindows,
}

impl Default for RunManifest {
    fn default() -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            mode: DisorderMode::DynamicalSpatial,
            zeta: std::f64::consts::PI,
            steps: 20,
            realizations: 500,
            seed: None,
            engine: Engine::Trajectory,
            threads: None,
            out_dir: PathBuf::from("qwalk-out"),
            fit: FitWindows::default(),
        }
    }
}

impl RunManifest {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize manifest: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let seed = self
            .seed
            .ok_or_else(|| CliError::Config("a seed is required (set `seed` or pass --seed)".into()))?;
        if seed > i64::MAX as u64 {
            return Err(CliError::Config(format!("seed {seed} must be below 2^63")));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        self.disorder_config()?.validate()?;
        if self.engine == Engine::Exact {
            if self.mode == DisorderMode::StaticSpatial {
                return Err(qwalk_core::Error::UnsupportedMode(self.mode).into());
            }
            if self.steps > EXACT_MAX_STEPS {
                return Err(CliError::Config(format!(
                    "the exact engine stores a dense matrix of dimension 2(2N+1)^2; steps = {} exceeds its limit of {EXACT_MAX_STEPS}",
                    self.steps
                )));
            }
        }
        Ok(())
    }

    pub fn disorder_config(&self) -> Result<ConfigF64> {
        let seed = self
            .seed
            .ok_or_else(|| CliError::Config("a seed is required (set `seed` or pass --seed)".into()))?;
        Ok(DisorderConfig::new(self.mode, self.zeta, self.realizations, seed, self.steps))
    }
}

/// Parses `3.14`, `pi`, `pi/2`, `0.5pi`, `0.5*pi` or `3*pi/4`.
pub fn parse_zeta(text: &str) -> Result<f64> {
    let bad = || CliError::Config(format!("cannot parse zeta `{text}`"));
    let t: String = text.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    let (numer, denom) = match t.split_once('/') {
        Some((a, b)) => (a.to_string(), Some(b.parse::<f64>().map_err(|_| bad())?)),
        None => (t.clone(), None),
    };
    let value = if let Some(coef) = numer.strip_suffix("pi") {
        let coef = coef.trim_end_matches('*');
        let c = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
        c * std::f64::consts::PI
    } else {
        numer.parse::<f64>().map_err(|_| bad())?
    };
    let value = match denom {
        Some(d) if d != 0.0 => value / d,
        Some(_) => return Err(bad()),
        None => value,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn deserialize_zeta<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Int(i64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(x),
        Raw::Int(x) => Ok(x as f64),
        Raw::Text(s) => parse_zeta(&s).map_err(serde::de::Error::custom),
    }
}
