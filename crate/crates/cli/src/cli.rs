use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, AnalysisOp, AnalyzeRequest, DEFAULT_RADII, TAIL_WINDOW};
use crate::config::{FileConfig, Overrides, RunConfig, DEFAULT_XI_GRID, WORKERS_ENV};
use crate::error::Result;
use lorentz_core::diophantine::DEFAULT_CAP;
use lorentz_core::ensembles::DEFAULT_XI_CAP;

#[derive(Debug, Parser)]
#[command(name = "lorentz", version, about = "Free path statistics of the periodic Lorentz gas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample free paths; writes samples.csv and summary.json.
    Simulate(RunArgs),
    /// Analyse a sample file.
    Analyze(AnalyzeArgs),
    /// Self-convergence probe over a ladder of radii and several shifts.
    Converge(ConvergeArgs),
    /// Closed-form constants for one dimension.
    Constants(ConstantsArgs),
    /// Diophantine approximation function zeta(b, T).
    Zeta(ZetaArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML configuration; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// `0`, `golden`, `p/q`, or a comma-separated vector.
    #[arg(long)]
    pub alpha: Option<String>,
    /// fixed, phase or boundary.
    #[arg(long)]
    pub ensemble: Option<String>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub xi_cap: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            dim: self.dim,
            radius: self.radius,
            alpha: self.alpha.clone(),
            ensemble: self.ensemble.clone(),
            samples: self.samples,
            seed: self.seed,
            workers: self.workers,
            xi_cap: self.xi_cap,
            out: self.out.clone(),
            ..Default::default()
        }
    }

    fn file(&self) -> Result<FileConfig> {
        match &self.config {
            Some(p) => FileConfig::load(p),
            None => Ok(FileConfig::default()),
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Sample CSV written by `simulate`.
    pub samples: PathBuf,
    /// Comma-separated analyses: ccdf, tail, entropy, cross.
    #[arg(long, default_value = "ccdf,tail,entropy")]
    pub ops: String,
    /// Phase-ensemble sample CSV for `cross`.
    #[arg(long)]
    pub phase_samples: Option<PathBuf>,
    /// Grid of `a` values for ccdf and cross.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = TAIL_WINDOW.0)]
    pub tail_lo: f64,
    #[arg(long, default_value_t = TAIL_WINDOW.1)]
    pub tail_hi: f64,
    /// Cap used when the file holds no censored rows.
    #[arg(long, default_value_t = DEFAULT_XI_CAP)]
    pub xi_cap: f64,
    /// Finite-difference half-width for cross; defaults to max(0.02, 2 n^-1/5).
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Strictly decreasing radii, at least four.
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub xi_grid: Option<Vec<f64>>,
    /// Semicolon-separated shifts, e.g. `0;1/3;golden`.
    #[arg(long)]
    pub alphas: Option<String>,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ZetaArgs {
    /// `golden`, `p/q`, or a comma-separated vector.
    #[arg(long)]
    pub b: String,
    /// Length of `b` when a single component is given.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// One or more horizons T; two or more also fit the growth exponent.
    #[arg(long, value_delimiter = ',', required = true)]
    pub horizon: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = RunConfig::resolve(args.file()?, args.overrides())?;
            let summary = commands::simulate(&cfg)?;
            eprintln!(
                "wrote {} and {} ({} samples, {:.0}/s)",
                cfg.samples_path.display(),
                cfg.summary_path.display(),
                cfg.n_samples,
                summary.timing.samples_per_second
            );
            Ok(())
        }
        Command::Analyze(args) => {
            let ops = args.ops.split(',').map(AnalysisOp::parse).collect::<Result<Vec<_>>>()?;
            let req = AnalyzeRequest {
                samples: args.samples,
                phase_samples: args.phase_samples,
                ops,
                grid: args.grid.unwrap_or_else(|| DEFAULT_XI_GRID.to_vec()),
                tail_window: (args.tail_lo, args.tail_hi),
                xi_cap: args.xi_cap,
                bandwidth: args.bandwidth,
            };
            commands::write_report(&commands::analyze(&req)?, args.out.as_deref())
        }
        Command::Converge(args) => {
            let mut flags = args.run.overrides();
            flags.ladder = args.ladder;
            flags.xi_grid = args.xi_grid;
            flags.alphas = args.alphas.map(|s| s.split(';').map(|a| a.trim().to_string()).collect());
            flags.out = None;
            let file = args.run.file()?;
            let mut cfg = RunConfig::resolve(file, flags)?;
            if let Some(out) = &args.run.out {
                cfg.report_path = Some(out.clone());
            }
            let report = commands::converge(&cfg)?;
            commands::write_report(&report, cfg.report_path.as_deref())
        }
        Command::Constants(args) => {
            let radii = args.radii.unwrap_or_else(|| DEFAULT_RADII.to_vec());
            commands::write_report(&commands::constants(args.dim, &radii)?, args.out.as_deref())
        }
        Command::Zeta(args) => {
            let report = commands::zeta(&args.b, args.dim, &args.horizon, args.cap)?;
            commands::write_report(&report, args.out.as_deref())
        }
    }
}
