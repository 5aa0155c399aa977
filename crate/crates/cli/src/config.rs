//! Run configuration: a strict TOML file merged with command-line flags.
//!
//! ```toml
//! [lattice]
//! dim = 3
//! radius = 0.05
//! alpha = "golden"        # "0", "golden", "1/3", "0.1,0.25,0.7", ...
//! basis = [1, 0, 0, 0, 1, 0, 0, 0, 1]
//!
//! [ensemble]
//! kind = "boundary"       # fixed | phase | boundary
//! base_point = [0.5, 0.5, 0.5]
//!
//! [run]
//! samples = 100000
//! seed = 7
//! workers = 0
//! xi_cap = 100.0
//!
//! [output]
//! dir = "out"
//!
//! [converge]
//! ladder = [0.04, 0.02, 0.01, 0.005]
//! xi_grid = [0.1, 0.2, 0.5, 1, 2, 5]
//! alphas = ["0", "1/3", "golden"]
//! ```
//!
//! Unknown keys are errors. Flags override the file; `LORENTZ_WORKERS` overrides the
//! file's worker count and is itself overridden by `--workers`.

use std::path::{Path, PathBuf};

use lorentz_core::ensembles::{EnsembleKind, DEFAULT_XI_CAP};
use lorentz_core::lattice::{LatticeConfig, Shift, GOLDEN_FRACTION};
use serde::{Deserialize, Serialize};

use crate::error::{config, CliError, Result};

pub const WORKERS_ENV: &str = "LORENTZ_WORKERS";
pub const DEFAULT_XI_GRID: [f64; 6] = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0];

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub converge: ConvergeSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub dim: Option<usize>,
    pub radius: Option<f64>,
    pub alpha: Option<String>,
    pub basis: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub kind: Option<String>,
    pub base_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub xi_cap: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub ladder: Option<Vec<f64>>,
    pub xi_grid: Option<Vec<f64>>,
    pub alphas: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(config)
    }
}

/// Command-line values; `None` falls back to the file, then to the defaults.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dim: Option<usize>,
    pub radius: Option<f64>,
    pub alpha: Option<String>,
    pub ensemble: Option<String>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub xi_cap: Option<f64>,
    pub out: Option<PathBuf>,
    pub ladder: Option<Vec<f64>>,
    pub xi_grid: Option<Vec<f64>>,
    pub alphas: Option<Vec<String>>,
}

/// Fully resolved configuration, echoed into every summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub dim: usize,
    pub radius: f64,
    pub alpha: String,
    pub basis: Option<Vec<f64>>,
    pub ensemble: EnsembleKind,
    pub base_point: Option<Vec<f64>>,
    pub n_samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub xi_cap: f64,
    pub samples_path: PathBuf,
    pub summary_path: PathBuf,
    pub report_path: Option<PathBuf>,
    pub radius_ladder: Option<Vec<f64>>,
    pub xi_grid: Vec<f64>,
    pub alphas: Vec<String>,
}

impl RunConfig {
    pub fn resolve(file: FileConfig, flags: Overrides) -> Result<Self> {
        let dim = flags.dim.or(file.lattice.dim).unwrap_or(3);
        let radius = flags.radius.or(file.lattice.radius).unwrap_or(0.05);
        let alpha = flags.alpha.or(file.lattice.alpha).unwrap_or_else(|| "golden".into());
        let kind = flags.ensemble.or(file.ensemble.kind).unwrap_or_else(|| "boundary".into());
        let ensemble = EnsembleKind::parse(&kind)
            .ok_or_else(|| CliError::Config(format!("unknown ensemble `{kind}` (fixed, phase, boundary)")))?;
        let dir = flags.out.or(file.output.dir).unwrap_or_else(|| PathBuf::from("."));
        let cfg = RunConfig {
            dim,
            radius,
            alpha,
            basis: file.lattice.basis,
            ensemble,
            base_point: file.ensemble.base_point,
            n_samples: flags.samples.or(file.run.samples).unwrap_or(100_000),
            seed: flags.seed.or(file.run.seed).unwrap_or(1),
            workers: flags.workers.or(file.run.workers).unwrap_or(0),
            xi_cap: flags.xi_cap.or(file.run.xi_cap).unwrap_or(DEFAULT_XI_CAP),
            samples_path: file.output.samples.unwrap_or_else(|| dir.join("samples.csv")),
            summary_path: file.output.summary.unwrap_or_else(|| dir.join("summary.json")),
            report_path: file.output.report,
            radius_ladder: flags.ladder.or(file.converge.ladder),
            xi_grid: flags.xi_grid.or(file.converge.xi_grid).unwrap_or_else(|| DEFAULT_XI_GRID.to_vec()),
            alphas: flags
                .alphas
                .or(file.converge.alphas)
                .unwrap_or_else(|| vec!["0".into(), "1/3".into(), "golden".into()]),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        if !(self.xi_cap > 0.0 && self.xi_cap.is_finite()) {
            return Err(CliError::Config(format!("xi_cap must be positive, got {}", self.xi_cap)));
        }
        if let Some(ladder) = &self.radius_ladder {
            if ladder.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(CliError::Config("radius ladder must be strictly decreasing".into()));
            }
        }
        if self.xi_grid.iter().any(|&x| !(x > 0.0 && x < self.xi_cap)) {
            return Err(CliError::Config(format!("xi grid must lie in (0, {})", self.xi_cap)));
        }
        parse_alpha(&self.alpha, self.dim)?;
        for a in &self.alphas {
            parse_alpha(a, self.dim)?;
        }
        Ok(())
    }

    pub fn shift(&self) -> Result<Shift> {
        parse_alpha(&self.alpha, self.dim)
    }

    pub fn lattice(&self, radius: f64, shift: Shift) -> Result<LatticeConfig<f64>> {
        match &self.basis {
            Some(basis) => LatticeConfig::new(self.dim, basis.clone(), shift, radius),
            None => LatticeConfig::cubic(self.dim, shift, radius),
        }
        .map_err(config)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

enum Component {
    Ratio(i64, u64),
    Float(f64),
}

fn component(s: &str) -> Result<Component> {
    let s = s.trim();
    let bad = || CliError::Config(format!("cannot parse alpha component `{s}`"));
    if s == "golden" {
        return Ok(Component::Float(GOLDEN_FRACTION));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(CliError::Config("alpha has a zero denominator".into()));
        }
        return Ok(Component::Ratio(p, q));
    }
    if let Ok(k) = s.parse::<i64>() {
        return Ok(Component::Ratio(k, 1));
    }
    let x: f64 = s.parse().map_err(|_| bad())?;
    if !x.is_finite() {
        return Err(bad());
    }
    Ok(Component::Float(x))
}

/// Parses `zero`, `golden`, a single component repeated over all axes, or a
/// comma-separated list. Components are integers, fractions `p/q`, floats or `golden`.
pub fn parse_alpha(s: &str, dim: usize) -> Result<Shift> {
    let s = s.trim();
    if s == "zero" {
        return Ok(Shift::zero(dim));
    }
    let mut parts = s.split(',').map(component).collect::<Result<Vec<_>>>()?;
    if parts.len() == 1 {
        let one = parts.pop().unwrap();
        parts = (0..dim)
            .map(|_| match &one {
                Component::Ratio(p, q) => Component::Ratio(*p, *q),
                Component::Float(x) => Component::Float(*x),
            })
            .collect();
    }
    if parts.len() != dim {
        return Err(CliError::Config(format!("alpha has {} components, expected {dim}", parts.len())));
    }
    if parts.iter().any(|c| matches!(c, Component::Float(_))) {
        let values = parts
            .iter()
            .map(|c| match c {
                Component::Ratio(p, q) => *p as f64 / *q as f64,
                Component::Float(x) => *x,
            })
            .collect();
        return Ok(Shift::from_floats(values));
    }
    let ratios: Vec<(i64, u64)> = parts
        .iter()
        .map(|c| match c {
            Component::Ratio(p, q) => (*p, *q),
            Component::Float(_) => unreachable!(),
        })
        .collect();
    let mut den = 1u64;
    for &(_, q) in &ratios {
        den = den / gcd(den, q) * q;
    }
    let numerators: Vec<i64> = ratios.iter().map(|&(p, q)| p * (den / q) as i64).collect();
    let g = numerators.iter().fold(den, |g, &p| gcd(g, p.unsigned_abs()));
    let (numerators, den): (Vec<i64>, u64) = (numerators.iter().map(|p| p / g as i64).collect(), den / g);
    if den == 1 {
        Ok(Shift::Integer(numerators))
    } else {
        Ok(Shift::Rational { numerators, denominator: den })
    }
}
