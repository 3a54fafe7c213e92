use std::fs;
use std::path::{Path, PathBuf};

use qwalk_core::{exact_run, run_ensemble_with, variance, DistributionF64};

use crate::error::{CliError, Result};
use crate::manifest::{Engine, FitWindows, RunManifest};
use crate::output::{
    check_normalized, read_distribution_csv, render_heatmap_svg, write_distribution_csv, write_text,
    write_variance_csv, ColorScale, Fits, ReportConfig, RunReport, VariancePoint, REPORT_SCHEMA_VERSION,
};

pub const DISTRIBUTION_FILE: &str = "distribution.csv";
pub const VARIANCE_FILE: &str = "variance.csv";
pub const REPORT_FILE: &str = "result.json";
pub const HEATMAP_FILE: &str = "heatmap.svg";
pub const MANIFEST_FILE: &str = "manifest.toml";

/// Distributions for steps `0..=N` and the spread series with error bars.
pub struct Computed {
    pub distributions: Vec<DistributionF64>,
    pub variance: Vec<VariancePoint>,
}

pub fn compute(manifest: &RunManifest) -> Result<Computed> {
    manifest.validate()?;
    let config = manifest.disorder_config()?;
    match manifest.engine {
        Engine::Trajectory => {
            let ens = run_ensemble_with(&config, manifest.threads)?;
            let variance = ens
                .steps
                .iter()
                .zip(ens.standard_errors())
                .enumerate()
                .map(|(n, (s, se))| VariancePoint {
                    n,
                    v: s.variance,
                    stderr: Some(se),
                })
                .collect();
            let distributions = ens.steps.into_iter().map(|s| s.distribution).collect();
            Ok(Computed {
                distributions,
                variance,
            })
        }
        Engine::Exact => {
            let run = exact_run(&config, config.steps)?;
            let variance = run
                .variances
                .iter()
                .enumerate()
                .map(|(n, v)| VariancePoint {
                    n,
                    v: *v,
                    stderr: Some(0.0),
                })
                .collect();
            Ok(Computed {
                distributions: run.distributions,
                variance,
            })
        }
    }
}

pub fn build_report(manifest: &RunManifest, computed: &Computed) -> RunReport {
    let last = computed.distributions.last();
    RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        engine: Some(manifest.engine),
        config: Some(ReportConfig {
            mode: manifest.mode,
            zeta: manifest.zeta,
            steps: manifest.steps,
            realizations: match manifest.engine {
                Engine::Trajectory => manifest.realizations,
                Engine::Exact => 0,
            },
            seed: manifest.seed,
        }),
        variance: computed.variance.clone(),
        fits: Fits::compute(&computed.distributions, manifest.fit.resolve(manifest.steps)),
        origin_probability: last.map_or(0.0, |d| d.at(0, 0)),
    }
}

/// Runs the walk and writes every artifact into `manifest.out_dir`.
/// Returns the report that was written.
pub fn run(manifest: &RunManifest, scale: ColorScale) -> Result<RunReport> {
    let computed = compute(manifest)?;
    check_normalized(&computed.distributions)?;
    let report = build_report(manifest, &computed);

    let dir = &manifest.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_distribution_csv(&dir.join(DISTRIBUTION_FILE), &computed.distributions)?;
    write_variance_csv(&dir.join(VARIANCE_FILE), &computed.variance)?;
    write_text(&dir.join(REPORT_FILE), &report.to_json()?)?;
    let last = computed.distributions.last().expect("at least the initial distribution");
    let title = format!(
        "{} zeta={:.4} n={} engine={}",
        manifest.mode,
        manifest.zeta,
        last.step(),
        manifest.engine
    );
    write_text(&dir.join(HEATMAP_FILE), &render_heatmap_svg(last, scale, &title))?;
    write_text(&dir.join(MANIFEST_FILE), &manifest.to_toml()?)?;
    Ok(report)
}

/// `run` with the exact averaged-channel engine.
pub fn oracle(manifest: &RunManifest, scale: ColorScale) -> Result<RunReport> {
    let mut m = manifest.clone();
    m.engine = Engine::Exact;
    run(&m, scale)
}

/// Recomputes the spread series and fits from a distribution CSV. Writes
/// the report to `out`, or returns it only when `out` is `None`.
pub fn fit(input: &Path, windows: &FitWindows, out: Option<&PathBuf>) -> Result<RunReport> {
    let dists = read_distribution_csv(input)?;
    let steps = dists.len() - 1;
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        engine: None,
        config: None,
        variance: dists
            .iter()
            .enumerate()
            .map(|(n, d)| VariancePoint {
                n,
                v: variance(d),
                stderr: None,
            })
            .collect(),
        fits: Fits::compute(&dists, windows.resolve(steps)),
        origin_probability: dists[steps].at(0, 0),
    };
    if let Some(path) = out {
        write_text(path, &report.to_json()?)?;
    }
    Ok(report)
}
