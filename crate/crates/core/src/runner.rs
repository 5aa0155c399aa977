//! Monte Carlo orchestration.
//!
//! Samples are cut into fixed blocks of [`BLOCK`] draws; block `b` is generated from the
//! stream `(seed, b)` and blocks are reassembled in order, so the output depends on
//! `(seed, n_samples)` only. The worker count affects wall time and nothing else, and a
//! run of `n` samples is a prefix of any longer run with the same seed.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ensembles::{t_max_for, EnsembleError, EnsembleSpec, RngStream};
use crate::lattice::{free_path, GeometryError, LatticeConfig};
use crate::statistics::{DistributionMeta, EmpiricalDistribution, StatsError};

pub const BLOCK: u64 = 4096;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("n_samples must be at least 1")]
    NoSamples,
    #[error("xi_cap must be positive and finite, got {0}")]
    XiCap(f64),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone)]
pub struct RunPlan {
    pub config: LatticeConfig<f64>,
    pub ensemble: EnsembleSpec,
    pub n_samples: u64,
    pub seed: u64,
    /// Zero means one per available core.
    pub workers: usize,
    pub xi_cap: f64,
}

impl RunPlan {
    pub fn t_max(&self) -> f64 {
        t_max_for(self.config.dim(), self.config.radius(), self.xi_cap)
    }

    pub fn meta(&self) -> DistributionMeta {
        DistributionMeta {
            ensemble: self.ensemble.kind,
            dim: self.config.dim(),
            radius: self.config.radius(),
            alpha_class: self.config.alpha_class(),
        }
    }
}

/// One free flight. `(stream_id, counter)` replays the draw that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRecord {
    pub stream_id: u64,
    pub counter: u128,
    pub tau: f64,
    pub xi: f64,
    pub censored: bool,
    pub cos_in: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput<R> {
    pub items: Vec<R>,
    pub elapsed: Duration,
}

impl<R> RunOutput<R> {
    pub fn throughput(&self) -> f64 {
        self.items.len() as f64 / self.elapsed.as_secs_f64().max(1e-9)
    }
}

/// Runs the plan, keeping `f(record)` for every sample in canonical order.
pub fn run_map<R, F>(plan: &RunPlan, f: F) -> Result<RunOutput<R>, RunError>
where
    R: Send,
    F: Fn(&SampleRecord) -> R + Sync,
{
    if plan.n_samples == 0 {
        return Err(RunError::NoSamples);
    }
    if !(plan.xi_cap > 0.0 && plan.xi_cap.is_finite()) {
        return Err(RunError::XiCap(plan.xi_cap));
    }
    let t_max = plan.t_max();
    let blocks = plan.n_samples.div_ceil(BLOCK);
    let block = |b: u64| -> Result<Vec<R>, RunError> {
        let len = BLOCK.min(plan.n_samples - b * BLOCK);
        let mut rng = RngStream::new(plan.seed, b);
        let mut out = Vec::with_capacity(len as usize);
        for _ in 0..len {
            let counter = rng.counter();
            let query = plan.ensemble.sample(&plan.config, &mut rng, t_max)?;
            let s = free_path(&plan.config, &query)?;
            out.push(f(&SampleRecord {
                stream_id: b,
                counter,
                tau: s.tau,
                xi: s.xi,
                censored: s.censored,
                cos_in: s.incidence_cos,
            }));
        }
        Ok(out)
    };
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let parts: Vec<Result<Vec<R>, RunError>> = pool.install(|| (0..blocks).into_par_iter().map(block).collect());
    let mut items = Vec::with_capacity(plan.n_samples as usize);
    for part in parts {
        items.extend(part?);
    }
    Ok(RunOutput { items, elapsed: start.elapsed() })
}

pub fn run(plan: &RunPlan) -> Result<RunOutput<SampleRecord>, RunError> {
    run_map(plan, |r| *r)
}

/// Recomputes the sample at `(stream_id, counter)`.
pub fn replay(plan: &RunPlan, stream_id: u64, counter: u128) -> Result<SampleRecord, RunError> {
    let mut rng = RngStream::at(plan.seed, stream_id, counter);
    let query = plan.ensemble.sample(&plan.config, &mut rng, plan.t_max())?;
    let s = free_path(&plan.config, &query)?;
    Ok(SampleRecord { stream_id, counter, tau: s.tau, xi: s.xi, censored: s.censored, cos_in: s.incidence_cos })
}

pub fn distribution(plan: &RunPlan, records: &[SampleRecord]) -> Result<EmpiricalDistribution, StatsError> {
    EmpiricalDistribution::new(plan.meta(), plan.xi_cap, records.iter().map(|r| (r.xi, r.censored)))
}
