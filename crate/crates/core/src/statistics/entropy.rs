use serde::Serialize;

use super::empirical::EmpiricalDistribution;
use super::StatsError;
use crate::asymptotics::unit_ball_volume;
use crate::ensembles::EnsembleKind;
use crate::scalar::CompensatedSum;

/// Batches used for batch-means standard errors.
pub const BATCHES: usize = 32;
const MIN_PER_BATCH: usize = 2;

/// Mergeable sums of `xi`, `ln xi` and their squares.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MomentAccumulator {
    pub count: u64,
    pub sum: CompensatedSum,
    pub sum_sq: CompensatedSum,
    pub sum_log: CompensatedSum,
    pub sum_log_sq: CompensatedSum,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, xi: f64) {
        let l = xi.ln();
        self.count += 1;
        self.sum.add(xi);
        self.sum_sq.add(xi * xi);
        self.sum_log.add(l);
        self.sum_log_sq.add(l * l);
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
        self.sum_log.merge(&other.sum_log);
        self.sum_log_sq.merge(&other.sum_log_sq);
    }

    pub fn mean(&self) -> f64 {
        self.sum.value() / self.count as f64
    }

    pub fn mean_log(&self) -> f64 {
        self.sum_log.value() / self.count as f64
    }

    /// `ln(mean) - mean(ln)`, clamped at zero against rounding.
    pub fn log_gap(&self) -> f64 {
        (self.mean().ln() - self.mean_log()).max(0.0)
    }
}

impl Extend<f64> for MomentAccumulator {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.push(x);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub c_r: f64,
    pub mean_xi: f64,
    pub mean_log_xi: f64,
    /// `-mean_log_xi - ln |B_1^(d-1)|`
    pub c0_proxy: f64,
    /// Batch-means standard errors; absent below two samples per batch.
    pub c_r_se: Option<f64>,
    pub mean_xi_se: Option<f64>,
    pub mean_log_xi_se: Option<f64>,
    pub c0_proxy_se: Option<f64>,
    /// Worst-case shifts from excluding censored flights.
    pub mean_xi_censor_bias: f64,
    pub mean_log_xi_censor_bias: f64,
    pub c_r_censor_bias: f64,
    pub n_used: usize,
    pub n_censored: usize,
}

fn batch_se(values: &[f64]) -> f64 {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (var / m).sqrt()
}

/// `C_r = ln E[xi] - E[ln xi]` over uncensored boundary flights.
///
/// The censoring bias bounds assume a tail no heavier than `a^-2`, under which the mean
/// of `xi` beyond the cap is at most twice the cap.
pub fn entropy_constant(dist: &EmpiricalDistribution) -> Result<EntropyEstimate, StatsError> {
    let meta = dist.meta();
    if meta.ensemble != EnsembleKind::Boundary {
        return Err(StatsError::Ensemble { expected: EnsembleKind::Boundary, got: meta.ensemble });
    }
    let p_c = dist.censored_fraction();
    if p_c >= 0.01 {
        return Err(StatsError::TooMuchCensoring(p_c));
    }
    let values = dist.ordered();
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
        return Err(StatsError::CorruptSample { index, value });
    }
    let mut batches = Vec::new();
    let n = values.len();
    if n >= BATCHES * MIN_PER_BATCH {
        for b in 0..BATCHES {
            let mut acc = MomentAccumulator::new();
            acc.extend(values[b * n / BATCHES..(b + 1) * n / BATCHES].iter().copied());
            batches.push(acc);
        }
    } else {
        let mut acc = MomentAccumulator::new();
        acc.extend(values.iter().copied());
        batches.push(acc);
    }
    let mut total = MomentAccumulator::new();
    for b in &batches {
        total.merge(b);
    }
    let mean_xi = total.mean();
    let mean_log_xi = total.mean_log();
    let c_r = total.log_gap();
    let se = |f: fn(&MomentAccumulator) -> f64| {
        (batches.len() > 1).then(|| batch_se(&batches.iter().map(f).collect::<Vec<_>>()))
    };
    let mean_xi_se = se(MomentAccumulator::mean);
    let mean_log_xi_se = se(MomentAccumulator::mean_log);
    let c_r_se = se(MomentAccumulator::log_gap);

    let cap = dist.xi_cap();
    let (mean_xi_censor_bias, mean_log_xi_censor_bias) = if dist.n_censored() == 0 {
        (0.0, 0.0)
    } else {
        (2.0 * p_c * cap, p_c * (cap.ln().abs() + 1.0 + mean_log_xi.abs()))
    };
    let c_r_censor_bias = mean_xi_censor_bias / mean_xi + mean_log_xi_censor_bias;
    let c0_proxy = if meta.dim >= 2 {
        -mean_log_xi - unit_ball_volume::<f64>(meta.dim as u32 - 1).ln()
    } else {
        f64::NAN
    };
    Ok(EntropyEstimate {
        c_r,
        mean_xi,
        mean_log_xi,
        c0_proxy,
        c_r_se,
        mean_xi_se,
        mean_log_xi_se,
        c0_proxy_se: mean_log_xi_se,
        mean_xi_censor_bias,
        mean_log_xi_censor_bias,
        c_r_censor_bias,
        n_used: n,
        n_censored: dist.n_censored(),
    })
}

/// Mean free path of boundary flights against the exact finite-`r` value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SantaloCheck {
    pub mean_tau: f64,
    pub mean_tau_se: f64,
    pub exact: f64,
    pub zscore: f64,
    /// `p_c * t_max`: censored flights enter at `t_max`, and under an `a^-2` tail their
    /// expected overshoot is at most `t_max`.
    pub censor_bias: f64,
    /// `|mean - exact| <= 3 se + censor_bias`
    pub pass: bool,
    pub n: usize,
    pub n_censored: usize,
}

/// Censored flights are included at `tau = t_max`.
pub fn santalo_check(taus: &[f64], n_censored: usize, t_max: f64, exact: f64) -> Result<SantaloCheck, StatsError> {
    let n = taus.len();
    if n < 2 {
        return Err(StatsError::Empty);
    }
    let mut sum = CompensatedSum::new();
    taus.iter().for_each(|&t| sum.add(t));
    let mean = sum.value() / n as f64;
    let mut ss = CompensatedSum::new();
    taus.iter().for_each(|&t| ss.add((t - mean) * (t - mean)));
    let se = (ss.value() / (n as f64 - 1.0) / n as f64).sqrt();
    let censor_bias = n_censored as f64 / n as f64 * t_max;
    let zscore = (mean - exact) / se;
    Ok(SantaloCheck {
        mean_tau: mean,
        mean_tau_se: se,
        exact,
        zscore,
        censor_bias,
        pass: (mean - exact).abs() <= 3.0 * se + censor_bias,
        n,
        n_censored,
    })
}
