//! Output artifacts: distribution and variance CSVs, the JSON report and an
//! SVG heatmap.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use qwalk_core::{
    axis_cuts, fit_localization_cuts, fit_scaling_exponent, variance, DisorderMode, DistributionF64, LocalizationFit,
    ScalingFit, SiteIndex,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::manifest::{Engine, ResolvedWindows};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Largest allowed `|sum p - 1|` of any written distribution.
pub const NORM_TOLERANCE: f64 = 1e-9;

pub fn check_normalized(dists: &[DistributionF64]) -> Result<()> {
    if dists.is_empty() {
        return Err(CliError::Numerical("no distributions to write".into()));
    }
    for d in dists {
        let drift = (d.total() - 1.0).abs();
        if !(drift <= NORM_TOLERANCE) {
            return Err(CliError::Numerical(format!(
                "probabilities at step {} sum to 1 {:+e}",
                d.step(),
                d.total() - 1.0
            )));
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| CliError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Config(format!("{}: {other:?}", path.display())),
    }
}

/// Writes `step,i,j,p` rows for every strictly positive cell.
pub fn write_distribution_csv(path: &Path, dists: &[DistributionF64]) -> Result<()> {
    check_normalized(dists)?;
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["step", "i", "j", "p"]).map_err(|e| csv_error(path, e))?;
    for d in dists {
        let step = d.step().to_string();
        for (site, p) in d.iter_nonzero() {
            w.write_record([step.as_str(), &site.i.to_string(), &site.j.to_string(), &format!("{p:?}")])
                .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads a `step,i,j,p` file back into one distribution per step. The grid
/// half-width is the largest step present, and steps must run from 0
/// without gaps.
pub fn read_distribution_csv(path: &Path) -> Result<Vec<DistributionF64>> {
    #[derive(Deserialize)]
    struct Row {
        step: usize,
        i: i32,
        j: i32,
        p: f64,
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = r.headers().map_err(|e| csv_error(path, e))?;
    if headers != vec!["step", "i", "j", "p"] {
        return Err(CliError::Config(format!(
            "{}: expected header `step,i,j,p`, found `{}`",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows: Vec<Row> = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec.map_err(|e| csv_error(path, e))?);
    }
    let last = rows
        .iter()
        .map(|r| r.step)
        .max()
        .ok_or_else(|| CliError::Config(format!("{}: no data rows", path.display())))?;
    let mut by_step: Vec<Vec<(SiteIndex, f64)>> = vec![Vec::new(); last + 1];
    for row in rows {
        if !(row.p.is_finite() && row.p >= 0.0) {
            return Err(CliError::Config(format!("{}: invalid probability {}", path.display(), row.p)));
        }
        by_step[row.step].push((SiteIndex::new(row.i, row.j), row.p));
    }
    if let Some(n) = by_step.iter().position(Vec::is_empty) {
        return Err(CliError::Config(format!("{}: no rows for step {n}", path.display())));
    }
    let dists = by_step
        .into_iter()
        .enumerate()
        .map(|(n, entries)| DistributionF64::from_entries(n, last, entries))
        .collect::<Result<Vec<_>, _>>()?;
    check_normalized(&dists)?;
    Ok(dists)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariancePoint {
    pub n: usize,
    #[serde(rename = "V")]
    pub v: f64,
    /// Standard error of `V`; zero for the exact engine, absent when unknown.
    pub stderr: Option<f64>,
}

pub fn write_variance_csv(path: &Path, points: &[VariancePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["n", "V", "stderr"]).map_err(|e| csv_error(path, e))?;
    for p in points {
        let se = p.stderr.map(|s| format!("{s:?}")).unwrap_or_default();
        w.write_record([p.n.to_string(), format!("{:?}", p.v), se])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub mode: DisorderMode,
    pub zeta: f64,
    pub steps: usize,
    pub realizations: u64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    pub scaling: Option<ScalingFit<f64>>,
    pub localization: Option<LocalizationFit<f64>>,
    /// Why a fit is missing, one line each.
    pub notes: Vec<String>,
}

impl Fits {
    pub fn compute(dists: &[DistributionF64], windows: ResolvedWindows) -> Self {
        let series: Vec<f64> = dists.iter().map(variance).collect();
        let mut notes = Vec::new();
        let scaling = fit_scaling_exponent(&series, windows.n_lo, windows.n_hi)
            .map_err(|e| notes.push(format!("scaling: {e}")))
            .ok();
        let localization = dists.last().and_then(|d| {
            fit_localization_cuts(&axis_cuts(d), windows.d_lo, windows.d_hi)
                .map_err(|e| notes.push(format!("localization: {e}")))
                .ok()
        });
        Fits {
            scaling,
            localization,
            notes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub engine: Option<Engine>,
    pub config: Option<ReportConfig>,
    pub variance: Vec<VariancePoint>,
    pub fits: Fits,
    pub origin_probability: f64,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Numerical(format!("cannot encode report: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("report: {e}")))
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColorScale {
    #[default]
    Linear,
    Log,
}

impl std::str::FromStr for ColorScale {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ColorScale::Linear),
            "log" => Ok(ColorScale::Log),
            other => Err(CliError::Config(format!("unknown color scale `{other}` (expected linear or log)"))),
        }
    }
}

/// Decades shown below the maximum on the log scale.
const LOG_DECADES: f64 = 6.0;

const CELL: usize = 12;
const MARGIN: usize = 30;

// Five-stop approximation of viridis.
const STOPS: [(f64, [u8; 3]); 5] = [
    (0.00, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.50, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.00, [253, 231, 37]),
];

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let k = STOPS.iter().rposition(|(s, _)| *s <= t).unwrap_or(0).min(STOPS.len() - 2);
    let (s0, c0) = STOPS[k];
    let (s1, c1) = STOPS[k + 1];
    let u = (t - s0) / (s1 - s0);
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * u).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(c0[0], c1[0]), mix(c0[1], c1[1]), mix(c0[2], c1[2]))
}

/// Heatmap of `dist` with `i` to the right and `j` upwards. Cells with
/// `p = 0` are left blank.
pub fn render_heatmap_svg(dist: &DistributionF64, scale: ColorScale, title: &str) -> String {
    let r = dist.half_width() as i32;
    let side = dist.half_width() * 2 + 1;
    let size = side * CELL + 2 * MARGIN;
    let max = dist.max();
    let level = |p: f64| match scale {
        ColorScale::Linear => p / max,
        ColorScale::Log => 1.0 + (p / max).log10() / LOG_DECADES,
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r#"<rect width="{size}" height="{size}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
        MARGIN - 10,
        escape(title)
    );
    for (site, p) in dist.iter_nonzero() {
        let x = MARGIN + (site.i + r) as usize * CELL;
        let y = MARGIN + (r - site.j) as usize * CELL;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}"><title>({}, {}) {p:e}</title></rect>"#,
            color(level(p)),
            site.i,
            site.j
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{w}" fill="none" stroke="black"/>"#,
        w = side * CELL
    );
    let label = match scale {
        ColorScale::Linear => format!("linear, max {max:.4e}"),
        ColorScale::Log => format!("log10, {LOG_DECADES} decades below {max:.4e}"),
    };
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="10">{label}</text>"#,
        size - 10
    );
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints() {
        assert_eq!(color(0.0), "#440154");
        assert_eq!(color(1.0), "#fde725");
        assert_eq!(color(-3.0), "#440154");
    }

    #[test]
    fn heatmap_skips_zero_cells() {
        let d = DistributionF64::from_entries(
            1,
            1,
            [(SiteIndex::new(1, 1), 0.5), (SiteIndex::new(-1, -1), 0.5)],
        )
        .unwrap();
        for scale in [ColorScale::Linear, ColorScale::Log] {
            let svg = render_heatmap_svg(&d, scale, "a < b");
            assert_eq!(svg.matches("<title>").count(), 2);
            assert!(svg.contains("a &lt; b"));
            assert!(svg.contains("#fde725"));
        }
    }

    #[test]
    fn normalization_is_enforced() {
        let d = DistributionF64::from_entries(0, 0, [(SiteIndex::ORIGIN, 1.0 + 1e-8)]).unwrap();
        assert_eq!(check_normalized(&[d]).unwrap_err().exit_code(), 4);
        let empty = DistributionF64::zeros(3, 3);
        let dir = std::env::temp_dir().join(format!("qwalk-empty-{}.csv", std::process::id()));
        assert_eq!(write_distribution_csv(&dir, &[empty]).unwrap_err().exit_code(), 4);
        assert!(!dir.exists());
        assert!(check_normalized(&[]).is_err());
    }
}
