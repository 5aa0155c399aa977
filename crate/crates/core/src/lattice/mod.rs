//! Exact free path lengths in a periodic array of spherical obstacles.
//!
//! Obstacles of radius `r` sit at the points of the affine lattice `(Z^d + alpha) M`
//! where the rows of `M` span a unimodular lattice. A ray is traced through the
//! Voronoi-like cells `round(x M^-1 - alpha) = k` and, in each cell, tested against
//! the few obstacles that can intersect it.

mod config;
mod oracle;
mod trace;

pub use config::{shortest_vector_bound, AlphaClass, LatticeConfig, Shift, ShortestVector, GOLDEN_FRACTION};
pub use oracle::free_path_bruteforce;
pub use trace::{free_path, ray_sphere, FreePathSample, RayQuery};

use arrayvec::ArrayVec;
use thiserror::Error;

/// Largest supported dimension.
pub const MAX_DIM: usize = 8;

/// A point or direction in at most [`MAX_DIM`] dimensions.
pub type Vector<T> = ArrayVec<T, MAX_DIM>;

/// Integer lattice coordinates of an obstacle.
pub type LatticeIndex = ArrayVec<i64, MAX_DIM>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension {0} is not supported (expected 2..=8)")]
    UnsupportedDimension(usize),
    #[error("expected {expected} components, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("basis is not unimodular (det = {0})")]
    NotUnimodular(f64),
    #[error("obstacles overlap: diameter {diameter} >= shortest lattice vector {shortest}")]
    Overlap { diameter: f64, shortest: f64 },
    #[error("radius must be finite and non-negative, got {0}")]
    InvalidRadius(f64),
    #[error("rational shift needs a positive denominator")]
    ZeroDenominator,
    #[error("shift components must be finite")]
    NonFiniteShift,
    #[error("ray origin lies inside obstacle {0:?}")]
    InvalidOrigin(Vec<i64>),
    #[error("direction is not a unit vector (norm {0})")]
    InvalidDirection(f64),
    #[error("flight cap must be positive and finite, got {0}")]
    InvalidCap(f64),
    #[error("brute-force oracle budget exceeded: {0}")]
    OracleBudget(String),
}
