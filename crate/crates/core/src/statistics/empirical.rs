use serde::Serialize;

use super::regression::{least_squares, log_grid};
use super::StatsError;
use crate::ensembles::EnsembleKind;
use crate::lattice::AlphaClass;

/// Default DKW confidence parameter.
pub const DEFAULT_DELTA: f64 = 1e-3;
pub const TAIL_GRID_POINTS: usize = 12;
/// Line fits below this `r^2` are flagged as not power-law.
pub const POWER_LAW_MIN_R2: f64 = 0.99;
const TAIL_MIN_SAMPLES: usize = 1000;
const LOW_COUNT: usize = 100;

/// Provenance carried with a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistributionMeta {
    pub ensemble: EnsembleKind,
    pub dim: usize,
    pub radius: f64,
    pub alpha_class: AlphaClass,
}

impl DistributionMeta {
    /// Tag for synthetic data with no geometry behind it.
    pub fn synthetic(ensemble: EnsembleKind) -> Self {
        Self { ensemble, dim: 0, radius: 0.0, alpha_class: AlphaClass::Integer }
    }
}

/// Immutable sample of `xi`, split into identified values and a censored count.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    meta: DistributionMeta,
    xi_cap: f64,
    /// Uncensored values in generation order.
    ordered: Vec<f64>,
    sorted: Vec<f64>,
    n_censored: usize,
}

/// Two-sided DKW half-width `sqrt(ln(2/delta) / (2n))`.
pub fn dkw_half_width(n: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// `max(0.02, 2 n^(-1/5))`
pub fn default_bandwidth(n: usize) -> f64 {
    (2.0 * (n as f64).powf(-0.2)).max(0.02)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcdfPoint {
    pub a: f64,
    pub ccdf: f64,
    pub band: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    pub n_effective: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub a: f64,
    pub h: f64,
    pub density: f64,
    /// DKW band divided by `h`.
    pub bound: f64,
    pub samples_in_window: usize,
    pub low_count: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    pub exponent: f64,
    pub exponent_se: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub power_law: bool,
    pub grid: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Builds from `(xi, censored)` pairs in generation order. Values at or above the
    /// cap count as censored.
    pub fn new<I>(meta: DistributionMeta, xi_cap: f64, samples: I) -> Result<Self, StatsError>
    where
        I: IntoIterator<Item = (f64, bool)>,
    {
        if !(xi_cap > 0.0) {
            return Err(StatsError::Domain(format!("xi_cap = {xi_cap}")));
        }
        let mut ordered = Vec::new();
        let mut n_censored = 0;
        for (index, (xi, censored)) in samples.into_iter().enumerate() {
            if censored || xi >= xi_cap {
                n_censored += 1;
            } else if xi.is_nan() || xi < 0.0 {
                return Err(StatsError::CorruptSample { index, value: xi });
            } else {
                ordered.push(xi);
            }
        }
        if ordered.is_empty() && n_censored == 0 {
            return Err(StatsError::Empty);
        }
        let mut sorted = ordered.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(Self { meta, xi_cap, ordered, sorted, n_censored })
    }

    /// Uncensored synthetic data with an infinite cap.
    pub fn synthetic(ensemble: EnsembleKind, values: &[f64]) -> Result<Self, StatsError> {
        Self::new(DistributionMeta::synthetic(ensemble), f64::INFINITY, values.iter().map(|&x| (x, false)))
    }

    pub fn meta(&self) -> &DistributionMeta {
        &self.meta
    }

    pub fn xi_cap(&self) -> f64 {
        self.xi_cap
    }

    pub fn n_total(&self) -> usize {
        self.sorted.len() + self.n_censored
    }

    pub fn n_censored(&self) -> usize {
        self.n_censored
    }

    pub fn censored_fraction(&self) -> f64 {
        self.n_censored as f64 / self.n_total() as f64
    }

    /// Uncensored values, ascending.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Uncensored values in generation order.
    pub fn ordered(&self) -> &[f64] {
        &self.ordered
    }

    /// Number of samples with `xi > a`, censored ones included.
    pub fn count_above(&self, a: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&x| x <= a) + self.n_censored
    }

    pub fn ccdf(&self, a: f64) -> Result<CcdfPoint, StatsError> {
        self.ccdf_with(a, DEFAULT_DELTA)
    }

    /// Empirical `P(xi > a)` with its DKW band at confidence `1 - delta`.
    pub fn ccdf_with(&self, a: f64, delta: f64) -> Result<CcdfPoint, StatsError> {
        if !(a >= 0.0) {
            return Err(StatsError::Domain(format!("a = {a}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(StatsError::Domain(format!("delta = {delta}")));
        }
        if a >= self.xi_cap {
            return Err(StatsError::Censored { a, cap: self.xi_cap });
        }
        let n = self.n_total();
        let ccdf = self.count_above(a) as f64 / n as f64;
        let band = dkw_half_width(n, delta);
        Ok(CcdfPoint {
            a,
            ccdf,
            band,
            band_lo: (ccdf - band).max(0.0),
            band_hi: (ccdf + band).min(1.0),
            n_effective: n,
        })
    }

    pub fn ccdf_table(&self, grid: &[f64]) -> Result<Vec<CcdfPoint>, StatsError> {
        grid.iter().map(|&a| self.ccdf(a)).collect()
    }

    /// Central difference `-(F(a+h) - F(a-h)) / 2h` of the CCDF.
    pub fn density_fd(&self, a: f64, h: f64) -> Result<DensityEstimate, StatsError> {
        if !(h > 0.0 && h < a && a < self.xi_cap - h) {
            return Err(StatsError::Domain(format!("need 0 < h < a < xi_cap - h, got a = {a}, h = {h}")));
        }
        let lo = self.ccdf(a - h)?;
        let hi = self.ccdf(a + h)?;
        let samples_in_window = self.sorted.partition_point(|&x| x <= a + h) - self.sorted.partition_point(|&x| x < a - h);
        Ok(DensityEstimate {
            a,
            h,
            density: (lo.ccdf - hi.ccdf) / (2.0 * h),
            bound: lo.band / h,
            samples_in_window,
            low_count: samples_in_window < LOW_COUNT,
        })
    }

    /// Least-squares fit of `ln CCDF` against `ln a` on a log grid over `[a_lo, a_hi]`.
    pub fn tail_fit(&self, a_lo: f64, a_hi: f64) -> Result<TailFit, StatsError> {
        if !(a_lo > 0.0 && a_hi > a_lo) {
            return Err(StatsError::Domain(format!("need 0 < a_lo < a_hi, got [{a_lo}, {a_hi}]")));
        }
        if a_hi > self.xi_cap / 2.0 {
            return Err(StatsError::Domain(format!("a_hi = {a_hi} exceeds half the cap {}", self.xi_cap)));
        }
        let above = self.count_above(a_lo);
        if above < TAIL_MIN_SAMPLES {
            return Err(StatsError::TooFewSamples { got: above, need: TAIL_MIN_SAMPLES });
        }
        let censored_share = self.n_censored as f64 / above as f64;
        if censored_share > 0.1 {
            return Err(StatsError::UnreliableTail(censored_share));
        }
        let grid = log_grid(a_lo, a_hi, TAIL_GRID_POINTS);
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for &a in &grid {
            let p = self.ccdf(a)?.ccdf;
            if p > 0.0 {
                xs.push(a.ln());
                ys.push(p.ln());
            }
        }
        let fit = least_squares(&xs, &ys)
            .filter(|_| xs.len() >= 3)
            .ok_or(StatsError::TooFewSamples { got: xs.len(), need: 3 })?;
        Ok(TailFit {
            exponent: fit.slope,
            exponent_se: fit.slope_se,
            amplitude: fit.intercept.exp(),
            r_squared: fit.r_squared,
            power_law: fit.r_squared >= POWER_LAW_MIN_R2,
            grid,
        })
    }
}
