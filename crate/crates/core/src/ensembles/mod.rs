//! Initial-condition measures.
//!
//! * fixed point: a fixed base point with a direction drawn from a law on the sphere;
//! * phase: the normalised Liouville measure `c_mu dq dv` on the free torus;
//! * boundary: the collision measure `c_nu <v, n(q)> dq dv` on an obstacle surface.

mod rng;

pub use rng::RngStream;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::{unit_ball_volume, unit_sphere_area};
use crate::lattice::{LatticeConfig, LatticeIndex, RayQuery, Vector};

/// Rejection loops give up after this many proposals.
pub const MAX_PROPOSALS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("dimension {0} is not supported")]
    Dimension(usize),
    #[error("base point lies within the obstacle {0:?}")]
    InvalidBasePoint(Vec<i64>),
    #[error("base point has {got} components, expected {expected}")]
    BasePointShape { expected: usize, got: usize },
    #[error("directional density {value} exceeds its declared bound {bound}")]
    DensityBound { value: f64, bound: f64 },
    #[error("declared density bound must be positive and finite")]
    InvalidBound,
    #[error("rejection sampler made no progress in {0} proposals")]
    RejectionStalled(usize),
    #[error("sampler expects a {expected} ensemble")]
    WrongKind { expected: EnsembleKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    #[serde(rename = "fixed")]
    FixedPoint,
    Phase,
    Boundary,
}

impl EnsembleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnsembleKind::FixedPoint => "fixed",
            EnsembleKind::Phase => "phase",
            EnsembleKind::Boundary => "boundary",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fixed" => Some(EnsembleKind::FixedPoint),
            "phase" => Some(EnsembleKind::Phase),
            "boundary" => Some(EnsembleKind::Boundary),
            _ => None,
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Direction law for the fixed-point ensemble, as a density against the uniform
/// probability measure on the sphere.
///
/// Error-rate statements for the fixed-point ensemble assume a smooth density; any
/// bounded continuous density is accepted here.
#[derive(Clone, Default)]
pub enum DirectionalLaw {
    #[default]
    Uniform,
    Density { density: DensityFn, sup_bound: f64 },
}

impl fmt::Debug for DirectionalLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirectionalLaw::Uniform => f.write_str("Uniform"),
            DirectionalLaw::Density { sup_bound, .. } => write!(f, "Density {{ sup_bound: {sup_bound} }}"),
        }
    }
}

/// Which measure is sampled, plus its normalisers.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub base_point: Option<Vec<f64>>,
    /// Obstacle removed when the base point sits on a lattice point.
    pub removed: Option<Vec<i64>>,
    pub law: DirectionalLaw,
    /// `1 / ((1 - r^d |B_1^d|) |S_1^(d-1)|)`
    pub c_mu: f64,
    /// `1 / (r^(d-1) |S_1^(d-1)| |B_1^(d-1)|)`
    pub c_nu: f64,
}

fn normalisers(dim: usize, r: f64) -> (f64, f64) {
    let d = dim as u32;
    let sphere: f64 = unit_sphere_area(d);
    let c_mu = 1.0 / ((1.0 - r.powi(dim as i32) * unit_ball_volume::<f64>(d)) * sphere);
    let c_nu = 1.0 / (r.powi(dim as i32 - 1) * sphere * unit_ball_volume::<f64>(d - 1));
    (c_mu, c_nu)
}

impl EnsembleSpec {
    fn with_kind(kind: EnsembleKind, cfg: &LatticeConfig<f64>) -> Self {
        let (c_mu, c_nu) = normalisers(cfg.dim(), cfg.radius());
        Self { kind, base_point: None, removed: None, law: DirectionalLaw::Uniform, c_mu, c_nu }
    }

    pub fn phase(cfg: &LatticeConfig<f64>) -> Self {
        Self::with_kind(EnsembleKind::Phase, cfg)
    }

    pub fn boundary(cfg: &LatticeConfig<f64>) -> Self {
        Self::with_kind(EnsembleKind::Boundary, cfg)
    }

    pub fn fixed_point(cfg: &LatticeConfig<f64>, q: Vec<f64>, law: DirectionalLaw) -> Result<Self, EnsembleError> {
        if q.len() != cfg.dim() {
            return Err(EnsembleError::BasePointShape { expected: cfg.dim(), got: q.len() });
        }
        if let DirectionalLaw::Density { sup_bound, .. } = &law {
            if !(sup_bound.is_finite() && *sup_bound > 0.0) {
                return Err(EnsembleError::InvalidBound);
            }
        }
        let mut spec = Self::with_kind(EnsembleKind::FixedPoint, cfg);
        spec.base_point = Some(q);
        spec.law = law;
        Ok(spec)
    }

    /// Fixed base point at the origin. For integer shifts the origin is an obstacle
    /// centre; that obstacle is removed.
    pub fn fixed_at_origin(cfg: &LatticeConfig<f64>, law: DirectionalLaw) -> Result<Self, EnsembleError> {
        let origin = vec![0.0; cfg.dim()];
        let mut spec = Self::fixed_point(cfg, origin.clone(), law)?;
        if let Some((z, dist)) = cfg.nearest_obstacle(&origin, None) {
            if dist <= cfg.radius() && dist < 1e-12 {
                spec.removed = Some(z.to_vec());
            }
        }
        Ok(spec)
    }

    /// Samples one initial condition with flight cap `t_max`.
    pub fn sample(
        &self,
        cfg: &LatticeConfig<f64>,
        rng: &mut RngStream,
        t_max: f64,
    ) -> Result<RayQuery<f64>, EnsembleError> {
        match self.kind {
            EnsembleKind::FixedPoint => sample_fixed_point(self, cfg, rng, t_max),
            EnsembleKind::Phase => sample_phase(cfg, rng, t_max),
            EnsembleKind::Boundary => Ok(sample_boundary(cfg, rng, t_max)),
        }
    }
}

/// Uniform direction on `S^(d-1)`: normalised vector of `d` standard normals.
pub fn sample_direction_uniform<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vector<f64> {
    loop {
        let g: Vector<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-150 {
            return g.iter().map(|x| x / norm).collect();
        }
    }
}

fn check_base_point(spec: &EnsembleSpec, cfg: &LatticeConfig<f64>, q: &[f64]) -> Result<(), EnsembleError> {
    if let Some((z, dist)) = cfg.nearest_obstacle(q, spec.removed.as_deref()) {
        if dist <= cfg.radius() {
            return Err(EnsembleError::InvalidBasePoint(z.to_vec()));
        }
    }
    Ok(())
}

pub fn sample_fixed_point(
    spec: &EnsembleSpec,
    cfg: &LatticeConfig<f64>,
    rng: &mut RngStream,
    t_max: f64,
) -> Result<RayQuery<f64>, EnsembleError> {
    if spec.kind != EnsembleKind::FixedPoint {
        return Err(EnsembleError::WrongKind { expected: EnsembleKind::FixedPoint });
    }
    let q = spec.base_point.as_deref().ok_or(EnsembleError::BasePointShape { expected: cfg.dim(), got: 0 })?;
    check_base_point(spec, cfg, q)?;
    let v = match &spec.law {
        DirectionalLaw::Uniform => sample_direction_uniform(rng, cfg.dim()),
        DirectionalLaw::Density { density, sup_bound } => {
            let mut accepted = None;
            for _ in 0..MAX_PROPOSALS {
                let v = sample_direction_uniform(rng, cfg.dim());
                let f = density(&v);
                if f > *sup_bound {
                    return Err(EnsembleError::DensityBound { value: f, bound: *sup_bound });
                }
                if rng.random::<f64>() * sup_bound < f {
                    accepted = Some(v);
                    break;
                }
            }
            accepted.ok_or(EnsembleError::RejectionStalled(MAX_PROPOSALS))?
        }
    };
    let mut query = RayQuery::new(q, &v, t_max);
    query.removed = spec.removed.as_ref().map(|z| z.iter().copied().collect::<LatticeIndex>());
    Ok(query)
}

/// Uniform point of the free part of the fundamental cell, uniform direction.
pub fn sample_phase(
    cfg: &LatticeConfig<f64>,
    rng: &mut RngStream,
    t_max: f64,
) -> Result<RayQuery<f64>, EnsembleError> {
    let q = sample_free_point(cfg, rng).ok_or(EnsembleError::RejectionStalled(MAX_PROPOSALS))?.0;
    let v = sample_direction_uniform(rng, cfg.dim());
    Ok(RayQuery::new(&q, &v, t_max))
}

/// Uniform free point and the number of proposals it took.
pub fn sample_free_point(cfg: &LatticeConfig<f64>, rng: &mut RngStream) -> Option<(Vector<f64>, usize)> {
    let r = cfg.radius();
    for attempt in 1..=MAX_PROPOSALS {
        let y: Vector<f64> = (0..cfg.dim()).map(|_| rng.random::<f64>()).collect();
        let q = cfg.from_lattice_coords(&y);
        match cfg.nearest_obstacle(&q, None) {
            Some((_, dist)) if dist <= r => continue,
            _ => return Some((q, attempt)),
        }
    }
    None
}

/// Uniform point on the surface of the origin-cell obstacle with an outgoing direction
/// of density proportional to `<v, n>`.
///
/// The direction is the lift of a uniform point of the unit `(d-1)`-ball in the tangent
/// plane, whose image on the hemisphere has exactly the cosine weight. The start point
/// is pushed outward by `1e-12 r` so it lies strictly outside the obstacle.
pub fn sample_boundary(cfg: &LatticeConfig<f64>, rng: &mut RngStream, t_max: f64) -> RayQuery<f64> {
    let dim = cfg.dim();
    let r = cfg.radius();
    let normal = sample_direction_uniform(rng, dim);
    let v = sample_cosine_direction(rng, &normal);
    let center = cfg.center(&vec![0; dim]);
    let q: Vector<f64> = center.iter().zip(&normal).map(|(c, n)| c + r * (1.0 + 1e-12) * n).collect();
    RayQuery::new(&q, &v, t_max)
}

/// Direction on the hemisphere around the unit `normal` with density proportional to
/// `<v, normal>`.
pub fn sample_cosine_direction<R: Rng + ?Sized>(rng: &mut R, normal: &[f64]) -> Vector<f64> {
    let dim = normal.len();
    // radius in the tangent ball has density proportional to rho^(d-2)
    let rho = rng.random::<f64>().powf(1.0 / (dim as f64 - 1.0));
    let tangent = loop {
        let g: Vector<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let along: f64 = g.iter().zip(normal).map(|(a, b)| a * b).sum();
        let t: Vector<f64> = g.iter().zip(normal).map(|(a, b)| a - along * b).collect();
        let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            break t.iter().map(|x| x / norm).collect::<Vector<f64>>();
        }
    };
    let lift = (1.0 - rho * rho).max(0.0).sqrt();
    let v: Vector<f64> = tangent.iter().zip(normal).map(|(t, n)| rho * t + lift * n).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let v: Vector<f64> = v.iter().map(|x| x / norm).collect();
    if v.iter().zip(normal).map(|(a, b)| a * b).sum::<f64>() > 0.0 {
        v
    } else {
        // rho rounded to 1: step back inside the open hemisphere
        let w: Vector<f64> = v.iter().zip(normal).map(|(a, n)| a + 1e-9 * n).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        w.iter().map(|x| x / norm).collect()
    }
}

/// Default flight cap: `xi_cap / r^(d-1)` with `xi_cap = 100`.
pub fn default_t_max(dim: usize, r: f64) -> f64 {
    t_max_for(dim, r, DEFAULT_XI_CAP)
}

pub const DEFAULT_XI_CAP: f64 = 100.0;

pub fn t_max_for(dim: usize, r: f64, xi_cap: f64) -> f64 {
    xi_cap / r.powi(dim as i32 - 1)
}
