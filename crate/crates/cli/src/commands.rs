//! Subcommand implementations. Each returns a serialisable report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use lorentz_core::asymptotics::{
    entropy_expansion, mean_free_path_exact, AsymptoticConstants, DELTA_R_NOTE, NEAR_ZERO_MAX_XI,
};
use lorentz_core::diophantine::{
    diophantine_exponent_probe, zeta_fn, zeta_rational, DiophantineQuery, Zeta, DEFAULT_CAP,
};
use lorentz_core::ensembles::{DirectionalLaw, EnsembleKind, EnsembleSpec};
use lorentz_core::lattice::{AlphaClass, LatticeConfig, Shift};
use lorentz_core::runner::{run, run_map, RunPlan, SampleRecord, BLOCK};
use lorentz_core::statistics::{
    cross_ensemble_check, entropy_constant, santalo_check, CcdfPoint, CrossRow, DistributionMeta,
    EmpiricalDistribution, EntropyEstimate, TailFit,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_alpha, RunConfig};
use crate::error::{config, runtime, CliError, Result};
use crate::io::{commit_all, preflight, read_samples, sig15, stage_bytes, stage_samples, to_json, SampleTable};

pub const TAIL_WINDOW: (f64, f64) = (3.0, 20.0);
pub const CONVERGE_BANNER: &str = "Self-convergence: D(r) is the sup over the xi grid of |CCDF_r - CCDF_rmin| \
against the finest radius, since no closed form of the limit exists for d >= 3. Rates are observations, not gates.";

fn ensemble_spec(cfg: &RunConfig, lattice: &LatticeConfig<f64>, kind: EnsembleKind) -> Result<EnsembleSpec> {
    match kind {
        EnsembleKind::Boundary => Ok(EnsembleSpec::boundary(lattice)),
        EnsembleKind::Phase => Ok(EnsembleSpec::phase(lattice)),
        EnsembleKind::FixedPoint => match &cfg.base_point {
            Some(q) => EnsembleSpec::fixed_point(lattice, q.clone(), DirectionalLaw::Uniform).map_err(config),
            None => EnsembleSpec::fixed_at_origin(lattice, DirectionalLaw::Uniform).map_err(config),
        },
    }
}

/// Value or the error that prevented it.
fn outcome<T: Serialize, E: std::fmt::Display>(r: std::result::Result<T, E>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

#[derive(Debug, Serialize)]
pub struct Provenance {
    pub config: RunConfig,
    pub code_version: &'static str,
    pub seed: u64,
    pub alpha_class: AlphaClass,
    pub t_max: f64,
    pub block_size: u64,
}

#[derive(Debug, Serialize)]
pub struct SantaloSummary {
    pub mean_tau: f64,
    pub mean_tau_se: f64,
    /// Exact mean free path; defined for the boundary ensemble only.
    pub santalo_exact: Option<f64>,
    pub santalo_zscore: Option<f64>,
    pub censor_bias: f64,
    pub within_3se: Option<bool>,
    pub n_censored: usize,
}

#[derive(Debug, Serialize)]
pub struct NearZeroRow {
    pub a: f64,
    /// Boundary CCDF, or phase/fixed density estimate.
    pub observed: f64,
    pub uncertainty: f64,
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Debug, Serialize)]
pub struct NearZero {
    pub statistic: &'static str,
    pub planar_advisory: bool,
    pub rows: Vec<NearZeroRow>,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
    pub samples_per_second: f64,
    pub workers: usize,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub provenance: Provenance,
    pub santalo: SantaloSummary,
    pub entropy: Value,
    pub tail: Value,
    pub near_zero: Value,
    pub timing: Timing,
}

fn constants_for(dim: usize) -> Result<(AsymptoticConstants<f64>, bool)> {
    let c = AsymptoticConstants::<f64>::new(dim).map_err(config)?;
    Ok(if dim == 2 { (c.with_planar_advisory(), true) } else { (c, false) })
}

fn near_zero(dist: &EmpiricalDistribution) -> std::result::Result<NearZero, String> {
    let meta = dist.meta();
    let (c, planar_advisory) = constants_for(meta.dim).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    if meta.ensemble == EnsembleKind::Boundary {
        for a in [0.02, 0.05, 0.1] {
            let p = dist.ccdf(a).map_err(|e| e.to_string())?;
            let predicted = c.boundary_ccdf_near_zero(a).map_err(|e| e.to_string())?;
            rows.push(NearZeroRow { a, observed: p.ccdf, uncertainty: p.band, predicted, residual: p.ccdf - predicted });
        }
        Ok(NearZero { statistic: "boundary ccdf", planar_advisory, rows })
    } else {
        for a in [0.05, 0.1, NEAR_ZERO_MAX_XI] {
            let f = dist.density_fd(a, a / 2.0).map_err(|e| e.to_string())?;
            let predicted = c.phi_near_zero(a).map_err(|e| e.to_string())?;
            rows.push(NearZeroRow {
                a,
                observed: f.density,
                uncertainty: f.bound,
                predicted,
                residual: f.density - predicted,
            });
        }
        Ok(NearZero { statistic: "density (h = a/2)", planar_advisory, rows })
    }
}

fn summarise_taus(plan: &RunPlan, records: &[SampleRecord]) -> Result<SantaloSummary> {
    let taus: Vec<f64> = records.iter().map(|s| s.tau).collect();
    let n_censored = records.iter().filter(|s| s.censored).count();
    let boundary = plan.ensemble.kind == EnsembleKind::Boundary;
    let exact = mean_free_path_exact(plan.config.dim(), plan.config.radius()).map_err(config)?.length;
    if taus.len() < 2 {
        return Ok(SantaloSummary {
            mean_tau: taus[0],
            mean_tau_se: f64::NAN,
            santalo_exact: boundary.then_some(exact),
            santalo_zscore: None,
            censor_bias: n_censored as f64 * plan.t_max(),
            within_3se: None,
            n_censored,
        });
    }
    let s = santalo_check(&taus, n_censored, plan.t_max(), exact).map_err(runtime)?;
    Ok(SantaloSummary {
        mean_tau: s.mean_tau,
        mean_tau_se: s.mean_tau_se,
        santalo_exact: boundary.then_some(exact),
        santalo_zscore: boundary.then_some(s.zscore),
        censor_bias: s.censor_bias,
        within_3se: boundary.then_some(s.pass),
        n_censored,
    })
}

pub fn simulate(cfg: &RunConfig) -> Result<RunSummary> {
    preflight(&[&cfg.samples_path, &cfg.summary_path])?;
    let lattice = cfg.lattice(cfg.radius, cfg.shift()?)?;
    let ensemble = ensemble_spec(cfg, &lattice, cfg.ensemble)?;
    let plan = RunPlan {
        config: lattice,
        ensemble,
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        workers: cfg.workers,
        xi_cap: cfg.xi_cap,
    };
    let start = Instant::now();
    let output = run(&plan).map_err(runtime)?;
    let wall = start.elapsed().as_secs_f64();
    let records = output.items;
    let dist = lorentz_core::runner::distribution(&plan, &records).map_err(runtime)?;
    let summary = RunSummary {
        provenance: Provenance {
            config: cfg.clone(),
            code_version: env!("CARGO_PKG_VERSION"),
            seed: cfg.seed,
            alpha_class: plan.config.alpha_class(),
            t_max: plan.t_max(),
            block_size: BLOCK,
        },
        santalo: summarise_taus(&plan, &records)?,
        entropy: outcome(entropy_constant(&dist)),
        tail: outcome(dist.tail_fit(TAIL_WINDOW.0, TAIL_WINDOW.1)),
        near_zero: outcome(near_zero(&dist)),
        timing: Timing {
            wall_seconds: wall,
            samples_per_second: records.len() as f64 / wall.max(1e-9),
            workers: if cfg.workers == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { cfg.workers },
        },
    };
    let staged = vec![
        stage_samples(&cfg.samples_path, cfg.ensemble, cfg.dim, cfg.radius, &records)?,
        stage_bytes(&cfg.summary_path, &to_json(&summary)?)?,
    ];
    commit_all(staged)?;
    Ok(summary)
}

/// Analyses requested from `analyze`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisOp {
    Ccdf,
    Tail,
    Entropy,
    Cross,
}

impl AnalysisOp {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "ccdf" => Ok(Self::Ccdf),
            "tail" | "tail_fit" => Ok(Self::Tail),
            "entropy" | "entropy_constant" => Ok(Self::Entropy),
            "cross" | "cross_ensemble_check" => Ok(Self::Cross),
            other => Err(CliError::Config(format!("unknown analysis `{other}` (ccdf, tail, entropy, cross)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeRequest {
    pub samples: PathBuf,
    pub phase_samples: Option<PathBuf>,
    pub ops: Vec<AnalysisOp>,
    pub grid: Vec<f64>,
    pub tail_window: (f64, f64),
    pub xi_cap: f64,
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub source: PathBuf,
    pub ensemble: EnsembleKind,
    pub d: usize,
    pub r: f64,
    pub n_total: usize,
    pub n_censored: usize,
    pub xi_cap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ccdf: Option<Vec<CcdfPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_fit: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_constant: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_ensemble_check: Option<Value>,
}

/// Censored rows carry `xi = xi_cap`; without any, the supplied cap is used.
fn table_distribution(table: &SampleTable, fallback_cap: f64) -> Result<EmpiricalDistribution> {
    let cap = table.records.iter().find(|s| s.censored).map_or(fallback_cap, |s| s.xi);
    let meta = DistributionMeta {
        ensemble: table.ensemble,
        dim: table.dim,
        radius: table.radius,
        alpha_class: AlphaClass::Irrational,
    };
    EmpiricalDistribution::new(meta, cap, table.records.iter().map(|s| (s.xi, s.censored)))
        .map_err(|e| CliError::Input(e.to_string()))
}

pub fn analyze(req: &AnalyzeRequest) -> Result<AnalysisReport> {
    let table = read_samples(&req.samples)?;
    let dist = table_distribution(&table, req.xi_cap)?;
    let mut report = AnalysisReport {
        source: req.samples.clone(),
        ensemble: table.ensemble,
        d: table.dim,
        r: table.radius,
        n_total: dist.n_total(),
        n_censored: dist.n_censored(),
        xi_cap: dist.xi_cap(),
        ccdf: None,
        tail_fit: None,
        entropy_constant: None,
        cross_ensemble_check: None,
    };
    for op in &req.ops {
        match op {
            AnalysisOp::Ccdf => {
                report.ccdf = Some(dist.ccdf_table(&req.grid).map_err(|e| CliError::Config(e.to_string()))?);
            }
            AnalysisOp::Tail => report.tail_fit = Some(outcome::<TailFit, _>(dist.tail_fit(req.tail_window.0, req.tail_window.1))),
            AnalysisOp::Entropy => report.entropy_constant = Some(outcome::<EntropyEstimate, _>(entropy_constant(&dist))),
            AnalysisOp::Cross => {
                let path = req
                    .phase_samples
                    .as_ref()
                    .ok_or_else(|| CliError::Config("cross needs --phase-samples".into()))?;
                let mu = table_distribution(&read_samples(path)?, req.xi_cap)?;
                let rows = cross_ensemble_check(&mu, &dist, &req.grid, req.bandwidth);
                report.cross_ensemble_check = Some(outcome::<Vec<CrossRow>, _>(rows));
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct LadderRow {
    pub r: f64,
    /// `T = r^(-(d-1)/2)`
    pub horizon: f64,
    pub zeta: u64,
    pub zeta_capped: bool,
    pub ccdf: Vec<f64>,
    pub band: f64,
    pub n_censored: usize,
    pub sup_distance: f64,
    /// Combined DKW half-widths of this run and the finest one.
    pub sup_distance_band: f64,
    pub resolution_limited: bool,
}

#[derive(Debug, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Serialize)]
pub struct AlphaReport {
    pub alpha: String,
    pub class: AlphaClass,
    pub rows: Vec<LadderRow>,
    pub rate: Option<RateFit>,
}

#[derive(Debug, Serialize)]
pub struct ConvergeReport {
    pub banner: &'static str,
    pub dim: usize,
    pub ensemble: EnsembleKind,
    pub base_point: Vec<f64>,
    pub seed: u64,
    pub n_samples: u64,
    pub xi_cap: f64,
    pub xi_grid: Vec<f64>,
    pub ladder: Vec<f64>,
    pub alphas: Vec<AlphaReport>,
}

fn zeta_for(shift: &Shift, horizon: f64) -> Result<Zeta> {
    match shift {
        Shift::Integer(v) => zeta_rational(v, 1, horizon, DEFAULT_CAP).map_err(runtime),
        Shift::Rational { numerators, denominator } => {
            zeta_rational(numerators, *denominator, horizon, DEFAULT_CAP).map_err(runtime)
        }
        Shift::Irrational(v) => Ok(zeta_fn(&DiophantineQuery::new(v, horizon, DEFAULT_CAP).map_err(runtime)?)),
    }
}

/// Fixed-point ensemble at `q = 0` across the radius ladder for each shift.
pub fn converge(cfg: &RunConfig) -> Result<ConvergeReport> {
    let ladder = cfg
        .radius_ladder
        .clone()
        .ok_or_else(|| CliError::Config("converge needs a radius ladder (--ladder)".into()))?;
    if ladder.len() < 4 {
        return Err(CliError::Config(format!("ladder needs at least 4 radii, got {}", ladder.len())));
    }
    if let Some(path) = &cfg.report_path {
        preflight(&[path])?;
    }
    let base_point = cfg.base_point.clone().unwrap_or_else(|| vec![0.0; cfg.dim]);
    let mut alphas = Vec::new();
    for alpha in &cfg.alphas {
        let shift = parse_alpha(alpha, cfg.dim)?;
        let mut dists = Vec::new();
        for &r in &ladder {
            let lattice = cfg.lattice(r, shift.clone())?;
            let ensemble = match &cfg.base_point {
                Some(q) => EnsembleSpec::fixed_point(&lattice, q.clone(), DirectionalLaw::Uniform),
                None => EnsembleSpec::fixed_at_origin(&lattice, DirectionalLaw::Uniform),
            }
            .map_err(config)?;
            let plan = RunPlan {
                config: lattice,
                ensemble,
                n_samples: cfg.n_samples,
                seed: cfg.seed,
                workers: cfg.workers,
                xi_cap: cfg.xi_cap,
            };
            let flights = run_map(&plan, |s| (s.xi, s.censored)).map_err(runtime)?.items;
            dists.push(EmpiricalDistribution::new(plan.meta(), cfg.xi_cap, flights).map_err(runtime)?);
        }
        let ccdfs: Vec<Vec<CcdfPoint>> = dists
            .iter()
            .map(|d| d.ccdf_table(&cfg.xi_grid))
            .collect::<std::result::Result<_, _>>()
            .map_err(runtime)?;
        let finest = ccdfs.last().unwrap();
        let mut rows = Vec::new();
        for ((&r, table), dist) in ladder.iter().zip(&ccdfs).zip(&dists) {
            let sup_distance = table.iter().zip(finest).map(|(a, b)| (a.ccdf - b.ccdf).abs()).fold(0.0, f64::max);
            let sup_distance_band = table[0].band + finest[0].band;
            let horizon = r.powf(-(cfg.dim as f64 - 1.0) / 2.0);
            let zeta = zeta_for(&shift, horizon)?;
            rows.push(LadderRow {
                r,
                horizon,
                zeta: match zeta {
                    Zeta::Exact(n) | Zeta::Capped(n) => n,
                },
                zeta_capped: matches!(zeta, Zeta::Capped(_)),
                ccdf: table.iter().map(|p| p.ccdf).collect(),
                band: table[0].band,
                n_censored: dist.n_censored(),
                sup_distance,
                sup_distance_band,
                resolution_limited: sup_distance <= sup_distance_band,
            });
        }
        let usable: Vec<&LadderRow> = rows[..rows.len() - 1].iter().filter(|row| row.sup_distance > 0.0).collect();
        let rate = (usable.len() >= 2)
            .then(|| {
                let xs: Vec<f64> = usable.iter().map(|row| row.r.ln()).collect();
                let ys: Vec<f64> = usable.iter().map(|row| row.sup_distance.ln()).collect();
                lorentz_core::statistics::regression::least_squares(&xs, &ys)
            })
            .flatten()
            .map(|f| RateFit { slope: f.slope, intercept: f.intercept, r_squared: f.r_squared, points: usable.len() });
        alphas.push(AlphaReport { alpha: alpha.clone(), class: shift.class(), rows, rate });
    }
    let report = ConvergeReport {
        banner: CONVERGE_BANNER,
        dim: cfg.dim,
        ensemble: EnsembleKind::FixedPoint,
        base_point,
        seed: cfg.seed,
        n_samples: cfg.n_samples,
        xi_cap: cfg.xi_cap,
        xi_grid: cfg.xi_grid.clone(),
        ladder,
        alphas,
    };
    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct MeanFreePathRow {
    pub r: f64,
    pub length: f64,
    pub scaled: f64,
    pub entropy_leading: f64,
}

#[derive(Debug, Serialize)]
pub struct ConstantsReport {
    pub dim: usize,
    pub vol_ball_d: f64,
    pub vol_ball_d_minus_1: f64,
    pub vol_sphere: f64,
    pub riemann_zeta_d: f64,
    pub tail_c: f64,
    pub near_zero_slope: f64,
    /// Set for `d = 2`, where the near-zero and tail laws are advisory.
    pub planar_advisory: bool,
    pub mean_free_path: Vec<MeanFreePathRow>,
    pub entropy_note: &'static str,
}

pub const DEFAULT_RADII: [f64; 5] = [0.1, 0.05, 0.02, 0.01, 0.005];

pub fn constants(dim: usize, radii: &[f64]) -> Result<ConstantsReport> {
    let (c, planar_advisory) = constants_for(dim)?;
    let mean_free_path = radii
        .iter()
        .map(|&r| {
            let m = mean_free_path_exact(dim, r).map_err(config)?;
            let e = entropy_expansion(dim, r, 0.0, 0.0).map_err(config)?;
            Ok(MeanFreePathRow { r, length: sig15(m.length), scaled: sig15(m.scaled), entropy_leading: sig15(e.leading) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConstantsReport {
        dim,
        vol_ball_d: sig15(c.vol_ball_d),
        vol_ball_d_minus_1: sig15(c.vol_ball_d_minus_1),
        vol_sphere: sig15(c.vol_sphere),
        riemann_zeta_d: sig15(c.riemann_zeta_d),
        tail_c: sig15(c.tail_c),
        near_zero_slope: sig15(c.near_zero_slope),
        planar_advisory,
        mean_free_path,
        entropy_note: DELTA_R_NOTE,
    })
}

#[derive(Debug, Serialize)]
pub struct ZetaRow {
    pub horizon: f64,
    pub zeta: u64,
    pub capped: bool,
}

#[derive(Debug, Serialize)]
pub struct ZetaReport {
    pub b: String,
    pub class: AlphaClass,
    pub cap: u64,
    pub rows: Vec<ZetaRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_exponent: Option<Value>,
}

pub fn zeta(b: &str, dim: usize, horizons: &[f64], cap: u64) -> Result<ZetaReport> {
    let shift = parse_alpha(b, dim)?;
    if horizons.is_empty() {
        return Err(CliError::Config("at least one horizon is required".into()));
    }
    let rows = horizons
        .iter()
        .map(|&t| {
            let z = match &shift {
                Shift::Integer(v) => zeta_rational(v, 1, t, cap),
                Shift::Rational { numerators, denominator } => zeta_rational(numerators, *denominator, t, cap),
                Shift::Irrational(v) => DiophantineQuery::new(v, t, cap).map(|q| zeta_fn(&q)),
            }
            .map_err(config)?;
            Ok(match z {
                Zeta::Exact(n) => ZetaRow { horizon: t, zeta: n, capped: false },
                Zeta::Capped(n) => ZetaRow { horizon: t, zeta: n, capped: true },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let growth_exponent = (horizons.len() >= 2).then(|| outcome(diophantine_exponent_probe(&shift.to_f64(), horizons, cap)));
    Ok(ZetaReport { b: b.to_string(), class: shift.class(), cap, rows, growth_exponent })
}

pub fn write_report<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    crate::io::emit_json(value, out)
}
