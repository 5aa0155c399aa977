use super::config::for_each_in_box;
use super::trace::{finish, validate};
use super::{ray_sphere, FreePathSample, GeometryError, LatticeConfig, LatticeIndex, RayQuery, Vector};
use crate::scalar::Scalar;

const MAX_ORACLE_CAP: f64 = 1e3;
const MAX_ORACLE_CANDIDATES: u64 = 2_000_000_000;

/// Reference free path: tests every obstacle with `|z - round(y0)|_inf <= t_max cond(M) + 2`.
///
/// Shares [`ray_sphere`] with [`super::free_path`], so the two agree bit for bit whenever
/// they select the same obstacle.
pub fn free_path_bruteforce<T: Scalar>(
    cfg: &LatticeConfig<T>,
    query: &RayQuery<T>,
) -> Result<FreePathSample<T>, GeometryError> {
    validate(cfg, query)?;
    let t_max = query.t_max.as_f64();
    if t_max > MAX_ORACLE_CAP {
        return Err(GeometryError::OracleBudget(format!("t_max {t_max} exceeds {MAX_ORACLE_CAP}")));
    }
    if cfg.radius() == T::zero() {
        return Ok(finish(cfg, query, None));
    }
    let d = cfg.dim();
    let k = (t_max * cfg.condition_number() + 2.0).ceil() as i64;
    let candidates = (2 * k as u64 + 1).checked_pow(d as u32).unwrap_or(u64::MAX);
    if candidates > MAX_ORACLE_CANDIDATES {
        return Err(GeometryError::OracleBudget(format!("{candidates} candidate obstacles")));
    }
    let origin = cfg.cell_of(&query.q);
    let r2 = cfg.radius() * cfg.radius();
    let mut c: Vector<T> = (0..d).map(|_| T::zero()).collect();
    let mut best: Option<(T, LatticeIndex)> = None;
    for_each_in_box(d, &origin, k, |z| {
        if query.removed.as_deref() == Some(z) {
            return;
        }
        cfg.center_into(z, &mut c);
        if let Some(t) = ray_sphere(&query.q, &query.v, &c, r2) {
            if t <= query.t_max && best.as_ref().is_none_or(|(b, _)| t < *b) {
                best = Some((t, z.iter().copied().collect()));
            }
        }
    });
    Ok(finish(cfg, query, best))
}
