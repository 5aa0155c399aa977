//! Free path statistics for the periodic Lorentz gas in the Boltzmann-Grad regime.
//!
//! * [`lattice`]: exact free path lengths in a periodic array of spheres.
//! * [`ensembles`]: reproducible samplers for the fixed-point, phase-space and boundary
//!   initial-condition measures.
//! * [`statistics`]: empirical CCDFs with DKW bands, finite-difference densities, tail
//!   fits and the entropy constant `C_r`.
//! * [`asymptotics`]: closed-form constants and asymptotic laws of the limiting densities.
//! * [`diophantine`]: the approximation function `zeta(b, T)` and growth probes.
//! * [`runner`]: parallel, worker-count independent Monte Carlo orchestration.
//!
//! Geometric and closed-form kernels are generic over [`Scalar`]; the aliases below fix
//! the usual `f64` instantiation.

pub mod asymptotics;
pub mod diophantine;
pub mod ensembles;
pub mod lattice;
pub mod runner;
pub mod scalar;
pub mod statistics;

pub use scalar::{CompensatedSum, Scalar};

/// Obstacle array in double precision.
pub type Lattice = lattice::LatticeConfig<f64>;
/// Obstacle array in single precision.
pub type LatticeF32 = lattice::LatticeConfig<f32>;
pub type Ray = lattice::RayQuery<f64>;
pub type Sample = lattice::FreePathSample<f64>;
pub type Constants = asymptotics::AsymptoticConstants<f64>;
