//! Empirical distributions of the scaled free path `xi = r^(d-1) tau`.
//!
//! Censored flights count towards every CCDF value below the cap but never towards
//! log-moments, which instead carry an explicit censoring bias bound.

mod cross;
mod empirical;
mod entropy;
pub mod regression;

pub use cross::{cross_ensemble_check, CrossRow};
pub use empirical::{
    default_bandwidth, dkw_half_width, CcdfPoint, DensityEstimate, DistributionMeta, EmpiricalDistribution,
    TailFit, DEFAULT_DELTA, POWER_LAW_MIN_R2, TAIL_GRID_POINTS,
};
pub use entropy::{entropy_constant, santalo_check, EntropyEstimate, MomentAccumulator, SantaloCheck, BATCHES};

use thiserror::Error;

use crate::ensembles::EnsembleKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("a = {a} lies in the censored region xi >= {cap}")]
    Censored { a: f64, cap: f64 },
    #[error("invalid argument: {0}")]
    Domain(String),
    #[error("{0} censored above the fit window, more than 10%")]
    UnreliableTail(f64),
    #[error("only {got} samples above a_lo, need {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("censored fraction {0} is at least 1%")]
    TooMuchCensoring(f64),
    #[error("sample {index} has xi = {value}")]
    CorruptSample { index: usize, value: f64 },
    #[error("expected a {expected} ensemble, got {got}")]
    Ensemble { expected: EnsembleKind, got: EnsembleKind },
    #[error("distributions differ in {0}")]
    Mismatch(&'static str),
    #[error("no samples")]
    Empty,
}
