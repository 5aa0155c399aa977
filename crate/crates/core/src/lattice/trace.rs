use serde::Serialize;

use super::{GeometryError, LatticeConfig, LatticeIndex, Vector};
use crate::scalar::Scalar;

/// A free flight request: start `q`, unit direction `v`, flight cap `t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayQuery<T: Scalar> {
    pub q: Vector<T>,
    pub v: Vector<T>,
    pub t_max: T,
    /// Obstacle removed from the array, e.g. the one centred on a lattice base point.
    pub removed: Option<LatticeIndex>,
}

impl<T: Scalar> RayQuery<T> {
    pub fn new(q: &[T], v: &[T], t_max: T) -> Self {
        Self { q: q.iter().copied().collect(), v: v.iter().copied().collect(), t_max, removed: None }
    }

    pub fn without_obstacle(mut self, z: &[i64]) -> Self {
        self.removed = Some(z.iter().copied().collect());
        self
    }
}

/// Outcome of one free flight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreePathSample<T: Scalar> {
    /// First collision time, or `t_max` when censored.
    pub tau: T,
    /// `r^(d-1) * tau`.
    pub xi: T,
    pub censored: bool,
    pub hit_center: Option<LatticeIndex>,
    pub hit_point: Option<Vector<T>>,
    /// `<v, -n>` at the impact point.
    pub incidence_cos: Option<T>,
}

/// First positive time at which `q + t v` meets the sphere `|x - c| = r`.
///
/// Uses the perpendicular offset `w - <w,v> v` rather than `|w|^2 - <w,v>^2` to avoid
/// cancellation on long flights. Tangency counts as a hit.
#[inline(always)]
pub fn ray_sphere<T: Scalar>(q: &[T], v: &[T], c: &[T], r2: T) -> Option<T> {
    let n = q.len();
    let mut b = T::zero();
    for i in 0..n {
        b = b + (c[i] - q[i]) * v[i];
    }
    if b <= T::zero() {
        return None;
    }
    let mut p2 = T::zero();
    for i in 0..n {
        let p = (c[i] - q[i]) - b * v[i];
        p2 = p2 + p * p;
    }
    if p2 > r2 {
        return None;
    }
    let t = b - (r2 - p2).sqrt();
    (t > T::zero()).then_some(t)
}

pub(super) fn validate<T: Scalar>(cfg: &LatticeConfig<T>, query: &RayQuery<T>) -> Result<(), GeometryError> {
    let d = cfg.dim();
    for len in [query.q.len(), query.v.len()] {
        if len != d {
            return Err(GeometryError::Shape { expected: d, got: len });
        }
    }
    if let Some(z) = &query.removed {
        if z.len() != d {
            return Err(GeometryError::Shape { expected: d, got: z.len() });
        }
    }
    if !(query.t_max > T::zero()) || !query.t_max.is_finite() {
        return Err(GeometryError::InvalidCap(query.t_max.as_f64()));
    }
    let norm = query.v.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
    if !((norm - T::one()).abs() <= T::unit_tolerance()) {
        return Err(GeometryError::InvalidDirection(norm.as_f64()));
    }
    if query.q.iter().any(|x| !x.is_finite()) {
        return Err(GeometryError::InvalidOrigin(Vec::new()));
    }
    let r = cfg.radius();
    if let Some((z, dist)) = cfg.nearest_obstacle(&query.q, query.removed.as_deref()) {
        if dist <= r {
            // a start on the surface is allowed when the flight leaves the obstacle
            let c = cfg.center(&z);
            let outward = query
                .q
                .iter()
                .zip(&c)
                .zip(&query.v)
                .fold(T::zero(), |a, ((q, c), v)| a + (*q - *c) * *v);
            let on_surface = r - dist <= T::lit(1e-12) * r.max(T::one());
            if !(on_surface && outward > T::zero() && r > T::zero()) {
                return Err(GeometryError::InvalidOrigin(z.to_vec()));
            }
        }
    }
    Ok(())
}

pub(super) fn finish<T: Scalar>(
    cfg: &LatticeConfig<T>,
    query: &RayQuery<T>,
    hit: Option<(T, LatticeIndex)>,
) -> FreePathSample<T> {
    let scale = cfg.radius().powi(cfg.dim() as i32 - 1);
    match hit {
        Some((tau, z)) => {
            let point: Vector<T> = query.q.iter().zip(&query.v).map(|(&q, &v)| q + tau * v).collect();
            let c = cfg.center(&z);
            let cos = point
                .iter()
                .zip(&c)
                .zip(&query.v)
                .fold(T::zero(), |a, ((p, c), v)| a + (*c - *p) * *v)
                / cfg.radius();
            FreePathSample {
                tau,
                xi: scale * tau,
                censored: false,
                hit_center: Some(z),
                hit_point: Some(point),
                incidence_cos: Some(cos.min(T::one())),
            }
        }
        None => FreePathSample {
            tau: query.t_max,
            xi: scale * query.t_max,
            censored: true,
            hit_center: None,
            hit_point: None,
            incidence_cos: None,
        },
    }
}

/// Exact first collision of the ray with the obstacle array, censored at `t_max`.
///
/// Walks the cells `round(y)` of the lattice-coordinate ray `y(t) = (q + t v) M^-1 - alpha`
/// in order of entry time and tests the obstacles of each cell's window. A candidate at
/// `t*` is final once the current cell is left after `t*`: every earlier hit point lies
/// in a cell that has already been visited.
pub fn free_path<T: Scalar>(
    cfg: &LatticeConfig<T>,
    query: &RayQuery<T>,
) -> Result<FreePathSample<T>, GeometryError> {
    validate(cfg, query)?;
    if cfg.radius() == T::zero() {
        return Ok(finish(cfg, query, None));
    }
    let removed = query.removed.as_deref();
    let hit = match cfg.dim() {
        2 => march::<T, 2>(cfg, query, removed),
        3 => march::<T, 3>(cfg, query, removed),
        4 => march::<T, 4>(cfg, query, removed),
        5 => march::<T, 5>(cfg, query, removed),
        6 => march::<T, 6>(cfg, query, removed),
        7 => march::<T, 7>(cfg, query, removed),
        8 => march::<T, 8>(cfg, query, removed),
        d => return Err(GeometryError::UnsupportedDimension(d)),
    };
    Ok(finish(cfg, query, hit))
}

fn march<T: Scalar, const D: usize>(
    cfg: &LatticeConfig<T>,
    query: &RayQuery<T>,
    removed: Option<&[i64]>,
) -> Option<(T, LatticeIndex)> {
    let mut q = [T::zero(); D];
    let mut v = [T::zero(); D];
    q.copy_from_slice(&query.q);
    v.copy_from_slice(&query.v);
    let y0 = cfg.to_lattice_coords(&q);
    let w = cfg.to_lattice_direction(&v);
    let half = T::lit(0.5);
    let r2 = cfg.radius() * cfg.radius();
    let t_max = query.t_max;

    let mut cell = [0i64; D];
    let mut step = [0i64; D];
    let mut inv = [T::zero(); D];
    let mut next = [T::infinity(); D];
    let mut face = [T::zero(); D];
    for i in 0..D {
        cell[i] = y0[i].round().to_i64().expect("finite lattice coordinate");
        if w[i] != T::zero() {
            step[i] = if w[i] > T::zero() { 1 } else { -1 };
            inv[i] = T::one() / w[i];
            face[i] = half * T::from_int(step[i]) - y0[i];
            next[i] = (T::from_int(cell[i]) + face[i]) * inv[i];
        }
    }

    let single = cfg.window().len() == 1 && removed.is_none();
    let mut best = T::infinity();
    let mut best_z = [0i64; D];
    let mut z = [0i64; D];
    let mut c = [T::zero(); D];
    loop {
        let mut axis = 0;
        let mut t_exit = next[0];
        for i in 1..D {
            if next[i] < t_exit {
                axis = i;
                t_exit = next[i];
            }
        }
        if single {
            cfg.center_into(&cell, &mut c);
            if let Some(t) = ray_sphere(&q, &v, &c, r2) {
                if t < best {
                    best = t;
                    best_z = cell;
                }
            }
        } else {
            for o in cfg.window() {
                for i in 0..D {
                    z[i] = cell[i] + o[i];
                }
                if removed.is_some_and(|s| s == z) {
                    continue;
                }
                cfg.center_into(&z, &mut c);
                if let Some(t) = ray_sphere(&q, &v, &c, r2) {
                    if t < best {
                        best = t;
                        best_z = z;
                    }
                }
            }
        }
        if best <= t_exit || t_exit > t_max {
            break;
        }
        cell[axis] += step[axis];
        next[axis] = (T::from_int(cell[axis]) + face[axis]) * inv[axis];
    }
    (best <= t_max).then(|| (best, best_z.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Shift;

    fn square(r: f64) -> LatticeConfig<f64> {
        LatticeConfig::cubic(2, Shift::zero(2), r).unwrap()
    }

    #[test]
    fn corridor_ray_is_censored() {
        let q = RayQuery::new(&[0.5, 0.5], &[1.0, 0.0], 1e6);
        let s = free_path(&square(0.1), &q).unwrap();
        assert!(s.censored);
        assert_eq!(s.tau, 1e6);
        assert!(s.hit_center.is_none());
    }

    #[test]
    fn head_on_hit() {
        let q = RayQuery::new(&[-0.3, 0.0], &[1.0, 0.0], 1e6);
        let s = free_path(&square(0.1), &q).unwrap();
        assert!(!s.censored);
        assert!((s.tau - 0.2).abs() < 1e-15);
        assert_eq!(s.hit_center.unwrap().as_slice(), &[0, 0]);
        assert!((s.incidence_cos.unwrap() - 1.0).abs() < 1e-15);
        assert!((s.xi - 0.1 * s.tau).abs() == 0.0);
    }

    #[test]
    fn grazing_hit_matches_hand_quadratic() {
        let q = RayQuery::new(&[0.5, 0.05], &[1.0, 0.0], 1e6);
        let s = free_path(&square(0.1), &q).unwrap();
        let expected = 0.5 - (0.01f64 - 0.0025).sqrt();
        assert!((s.tau - expected).abs() < 1e-14);
        assert!((s.tau - 0.413397).abs() < 1e-6);
        assert_eq!(s.hit_center.unwrap().as_slice(), &[1, 0]);
    }

    #[test]
    fn tangency_counts_as_hit() {
        // passes the obstacle at (1, 0) at perpendicular distance exactly r
        let q = RayQuery::new(&[0.5, 0.125], &[1.0, 0.0], 10.0);
        let s = free_path(&square(0.125), &q).unwrap();
        assert!(!s.censored);
        assert_eq!(s.tau, 0.5);
    }

    #[test]
    fn origin_inside_obstacle_is_rejected() {
        let q = RayQuery::new(&[0.05, 0.0], &[1.0, 0.0], 10.0);
        assert!(matches!(free_path(&square(0.1), &q), Err(GeometryError::InvalidOrigin(_))));
    }

    #[test]
    fn non_unit_direction_is_rejected() {
        let q = RayQuery::new(&[0.5, 0.5], &[1.0, 1.0], 10.0);
        assert!(matches!(free_path(&square(0.1), &q), Err(GeometryError::InvalidDirection(_))));
    }

    #[test]
    fn surface_start_must_point_outward() {
        let cfg = square(0.1);
        let out = RayQuery::new(&[0.1, 0.0], &[1.0, 0.0], 10.0);
        let s = free_path(&cfg, &out).unwrap();
        assert!((s.tau - 0.8).abs() < 1e-14);
        let inward = RayQuery::new(&[0.1, 0.0], &[-1.0, 0.0], 10.0);
        assert!(free_path(&cfg, &inward).is_err());
    }

    #[test]
    fn removed_obstacle_is_transparent() {
        let cfg = square(0.1);
        let q = RayQuery::new(&[0.0, 0.0], &[1.0, 0.0], 10.0).without_obstacle(&[0, 0]);
        let s = free_path(&cfg, &q).unwrap();
        assert!((s.tau - 0.9).abs() < 1e-14);
        assert_eq!(s.hit_center.unwrap().as_slice(), &[1, 0]);
    }

    #[test]
    fn zero_radius_is_always_censored() {
        let q = RayQuery::new(&[-0.3, 0.0], &[1.0, 0.0], 10.0);
        assert!(free_path(&square(0.0), &q).unwrap().censored);
    }

    #[test]
    fn shifted_obstacles() {
        let cfg = LatticeConfig::<f64>::cubic(2, Shift::Irrational(vec![0.25, 0.0]), 0.1).unwrap();
        let q = RayQuery::new(&[0.0, 0.0], &[1.0, 0.0], 10.0);
        let s = free_path(&cfg, &q).unwrap();
        assert!((s.tau - 0.15).abs() < 1e-15);
    }

    #[test]
    fn sheared_lattice_hits_skewed_neighbour() {
        let cfg = LatticeConfig::<f64>::new(2, vec![1.0, 0.5, 0.0, 1.0], Shift::zero(2), 0.1).unwrap();
        // obstacle (1,0) sits at (1, 0.5)
        let v = [1.0 / 5f64.sqrt(), 0.5 / 5f64.sqrt() * 2.0 / 2.0];
        let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let v = [v[0] / norm, v[1] / norm];
        let q = RayQuery::new(&[0.0, 0.0], &v, 10.0).without_obstacle(&[0, 0]);
        let s = free_path(&cfg, &q).unwrap();
        assert_eq!(s.hit_center.unwrap().as_slice(), &[1, 0]);
        assert!((s.tau - (1.25f64.sqrt() - 0.1)).abs() < 1e-12);
    }

    #[test]
    fn single_precision_kernel() {
        let cfg = LatticeConfig::<f32>::cubic(2, Shift::zero(2), 0.1).unwrap();
        let q = RayQuery::new(&[-0.3f32, 0.0], &[1.0, 0.0], 100.0);
        let s = free_path(&cfg, &q).unwrap();
        assert!((s.tau - 0.2).abs() < 1e-6);
    }
}
