use serde::Serialize;

use super::empirical::{default_bandwidth, EmpiricalDistribution};
use super::StatsError;
use crate::asymptotics::unit_ball_volume;
use crate::ensembles::EnsembleKind;

/// One grid point of the boundary-CCDF versus phase-density comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossRow {
    pub a: f64,
    pub nu_ccdf: f64,
    pub mu_density: f64,
    /// `mu_density / |B_1^(d-1)|`
    pub predicted: f64,
    pub residual: f64,
    /// DKW band of the boundary CCDF plus the density bound over `|B_1^(d-1)|`.
    pub bound: f64,
    pub within: bool,
    pub low_count: bool,
}

/// Checks `P_nu(xi > a) = Phi(a) / |B_1^(d-1)|` on `a_grid`, with `Phi` estimated by
/// central differences of the phase-ensemble CCDF. `h` defaults to the bandwidth rule.
///
/// The DKW bands at the default confidence are about 3.3 standard deviations wide, so
/// `bound` serves as the combined 3 sigma bound.
pub fn cross_ensemble_check(
    mu: &EmpiricalDistribution,
    nu: &EmpiricalDistribution,
    a_grid: &[f64],
    h: Option<f64>,
) -> Result<Vec<CrossRow>, StatsError> {
    let (m, n) = (mu.meta(), nu.meta());
    if m.ensemble != EnsembleKind::Phase {
        return Err(StatsError::Ensemble { expected: EnsembleKind::Phase, got: m.ensemble });
    }
    if n.ensemble != EnsembleKind::Boundary {
        return Err(StatsError::Ensemble { expected: EnsembleKind::Boundary, got: n.ensemble });
    }
    if m.dim != n.dim {
        return Err(StatsError::Mismatch("dimension"));
    }
    if m.radius != n.radius {
        return Err(StatsError::Mismatch("radius"));
    }
    if m.dim < 2 {
        return Err(StatsError::Domain(format!("dimension {}", m.dim)));
    }
    let ball = unit_ball_volume::<f64>(m.dim as u32 - 1);
    let h = h.unwrap_or_else(|| default_bandwidth(mu.n_total()));
    a_grid
        .iter()
        .map(|&a| {
            let p = nu.ccdf(a)?;
            let f = mu.density_fd(a, h)?;
            let predicted = f.density / ball;
            let residual = p.ccdf - predicted;
            let bound = p.band + f.bound / ball;
            Ok(CrossRow {
                a,
                nu_ccdf: p.ccdf,
                mu_density: f.density,
                predicted,
                residual,
                bound,
                within: residual.abs() <= bound,
                low_count: f.low_count,
            })
        })
        .collect()
}
