use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwalk_cli::commands;
use qwalk_cli::{parse_zeta, ColorScale, Engine, FitWindows, Result, RunManifest};

/// Dephased quantum walk on the square lattice.
#[derive(Parser)]
#[command(name = "qwalk", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble and write CSV, JSON and SVG outputs.
    Run(RunArgs),
    /// Same as `run` with the exact averaged density-matrix engine.
    Oracle(RunArgs),
    /// Recompute spread and fits from a distribution CSV.
    Fit(FitArgs),
}

#[derive(Args)]
struct FitFlags {
    #[arg(long, value_name = "N")]
    fit_n_lo: Option<usize>,
    #[arg(long, value_name = "N")]
    fit_n_hi: Option<usize>,
    #[arg(long, value_name = "D")]
    fit_d_lo: Option<usize>,
    #[arg(long, value_name = "D")]
    fit_d_hi: Option<usize>,
}

impl FitFlags {
    fn windows(&self) -> FitWindows {
        FitWindows {
            n_lo: self.fit_n_lo,
            n_hi: self.fit_n_hi,
            d_lo: self.fit_d_lo,
            d_hi: self.fit_d_hi,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; flags override its keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// none, dynamical_spatial, static_spatial or dynamical_uniform
    #[arg(long)]
    mode: Option<String>,
    /// Phase half-range in [0, pi]; accepts forms like `pi/2`.
    #[arg(long)]
    zeta: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    realizations: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// trajectory or exact
    #[arg(long)]
    engine: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    fit: FitFlags,
    /// linear or log
    #[arg(long, default_value = "linear")]
    color_scale: String,
}

impl RunArgs {
    fn manifest(&self) -> Result<RunManifest> {
        let mut m = match &self.config {
            Some(path) => RunManifest::load(path)?,
            None => RunManifest::default(),
        };
        if let Some(mode) = &self.mode {
            m.mode = mode.parse()?;
        }
        if let Some(zeta) = &self.zeta {
            m.zeta = parse_zeta(zeta)?;
        }
        if let Some(steps) = self.steps {
            m.steps = steps;
        }
        if let Some(r) = self.realizations {
            m.realizations = r;
        }
        if let Some(seed) = self.seed {
            m.seed = Some(seed);
        }
        if let Some(engine) = &self.engine {
            m.engine = engine.parse::<Engine>()?;
        }
        if let Some(t) = self.threads {
            m.threads = Some(t);
        }
        if let Some(dir) = &self.out_dir {
            m.out_dir = dir.clone();
        }
        m.fit.overlay(&self.fit.windows());
        Ok(m)
    }
}

#[derive(Args)]
struct FitArgs {
    /// Distribution CSV with columns step,i,j,p.
    #[arg(long)]
    input: PathBuf,
    /// Where to write the JSON report; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fit: FitFlags,
}

fn report_summary(report: &qwalk_cli::RunReport) {
    if let Some(last) = report.variance.last() {
        match last.stderr {
            Some(se) => println!("V({}) = {} +- {}", last.n, last.v, se),
            None => println!("V({}) = {}", last.n, last.v),
        }
    }
    if let Some(s) = &report.fits.scaling {
        println!("alpha = {:.4} (R^2 {:.4}, n in [{}, {}])", s.exponent, s.r_squared, s.n_lo, s.n_hi);
    }
    if let Some(l) = &report.fits.localization {
        println!(
            "decay slopes x {:.4} (R^2 {:.3}), y {:.4} (R^2 {:.3})",
            l.x.slope, l.x.r_squared, l.y.slope, l.y.r_squared
        );
    }
    for note in &report.fits.notes {
        eprintln!("note: {note}");
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let scale: ColorScale = args.color_scale.parse()?;
            let m = args.manifest()?;
            let report = commands::run(&m, scale)?;
            report_summary(&report);
            println!("wrote {}", m.out_dir.display());
        }
        Command::Oracle(args) => {
            let scale: ColorScale = args.color_scale.parse()?;
            let m = args.manifest()?;
            let report = commands::oracle(&m, scale)?;
            report_summary(&report);
            println!("wrote {}", m.out_dir.display());
        }
        Command::Fit(args) => {
            let report = commands::fit(&args.input, &args.fit.windows(), args.out.as_ref())?;
            if args.out.is_none() {
                print!("{}", report.to_json()?);
            } else {
                report_summary(&report);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

