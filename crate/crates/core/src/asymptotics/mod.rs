//! Dimension-dependent constants and closed-form asymptotic laws.
//!
//! `Phi` is the limiting density of the scaled free path `xi = r^(d-1) tau` from a
//! random phase-space point, `Psi = -Phi' / |B_1^(d-1)|` its counterpart for flights
//! leaving an obstacle surface.

mod special;

pub use special::{gamma_half_integer, riemann_zeta, unit_ball_volume, unit_sphere_area};

use serde::Serialize;
use thiserror::Error;

use crate::scalar::{CompensatedSum, Scalar};

/// Upper end of the near-zero trust region.
pub const NEAR_ZERO_MAX_XI: f64 = 0.2;
/// Lower end of the tail trust region.
pub const TAIL_MIN_XI: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticError {
    #[error("dimension {0} is outside 2..=8")]
    Dimension(usize),
    #[error("the expansions are established for d >= 3; enable the planar advisory to evaluate them at d = 2")]
    PlanarAdvisory,
    #[error("xi = {xi} outside the trust region [{lo}, {hi}]")]
    TrustRegion { xi: f64, lo: f64, hi: f64 },
    #[error("radius {0} outside (0, 1/2)")]
    Radius(f64),
    #[error("this identity is only defined for d = 2, got d = {0}")]
    NotPlanar(usize),
    #[error("free path samples must be positive, got {0}")]
    NonPositiveSample(f64),
    #[error("no samples")]
    Empty,
}

/// Constants entering the asymptotic laws in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticConstants<T: Scalar> {
    pub dim: usize,
    /// `|B_1^d|`
    pub vol_ball_d: T,
    /// `|B_1^(d-1)|`
    pub vol_ball_d_minus_1: T,
    /// `|S_1^(d-1)|`
    pub vol_sphere: T,
    pub riemann_zeta_d: T,
    /// `c_d = pi^((d-1)/2) / (2^d d zeta(d) Gamma((d+3)/2))`
    pub tail_c: T,
    /// `|B_1^(d-1)|^2 / zeta(d)`
    pub near_zero_slope: T,
    /// At `d = 2` the expansions are evaluated only when this is set.
    pub planar_advisory: bool,
}

impl<T: Scalar> AsymptoticConstants<T> {
    pub fn new(dim: usize) -> Result<Self, AsymptoticError> {
        if !(2..=8).contains(&dim) {
            return Err(AsymptoticError::Dimension(dim));
        }
        let d = dim as u32;
        let zeta = riemann_zeta(T::from_u32(d).unwrap());
        let ball_dm1 = unit_ball_volume::<T>(d - 1);
        let tail_c = T::PI().powf(T::from_u32(d - 1).unwrap() / T::lit(2.0))
            / (T::lit(2.0).powi(dim as i32) * T::from_u32(d).unwrap() * zeta * gamma_half_integer::<T>(d + 3));
        Ok(Self {
            dim,
            vol_ball_d: unit_ball_volume(d),
            vol_ball_d_minus_1: ball_dm1,
            vol_sphere: unit_sphere_area(d),
            riemann_zeta_d: zeta,
            tail_c,
            near_zero_slope: ball_dm1 * ball_dm1 / zeta,
            planar_advisory: false,
        })
    }

    /// Allows the `d = 2` evaluation of the near-zero and tail laws.
    pub fn with_planar_advisory(mut self) -> Self {
        self.planar_advisory = true;
        self
    }

    fn check_planar(&self) -> Result<(), AsymptoticError> {
        if self.dim == 2 && !self.planar_advisory {
            Err(AsymptoticError::PlanarAdvisory)
        } else {
            Ok(())
        }
    }

    /// `Phi(xi) ~ |B_1^(d-1)| - (|B_1^(d-1)|^2 / zeta(d)) xi` for `0 <= xi <= 0.2`.
    pub fn phi_near_zero(&self, xi: T) -> Result<T, AsymptoticError> {
        self.check_planar()?;
        if !(xi >= T::zero() && xi <= T::lit(NEAR_ZERO_MAX_XI)) {
            return Err(AsymptoticError::TrustRegion { xi: xi.as_f64(), lo: 0.0, hi: NEAR_ZERO_MAX_XI });
        }
        Ok(self.vol_ball_d_minus_1 - self.near_zero_slope * xi)
    }

    /// `Phi(xi) ~ c_d xi^-2` for `xi >= 2`.
    pub fn phi_tail(&self, xi: T) -> Result<T, AsymptoticError> {
        self.check_planar()?;
        if !(xi >= T::lit(TAIL_MIN_XI)) || xi.is_infinite() {
            return Err(AsymptoticError::TrustRegion { xi: xi.as_f64(), lo: TAIL_MIN_XI, hi: f64::INFINITY });
        }
        Ok(self.tail_c / (xi * xi))
    }

    /// Surface-ensemble CCDF near zero: `1 - (|B_1^(d-1)| / zeta(d)) a`, obtained by
    /// integrating `Psi = -Phi' / |B_1^(d-1)|` against the near-zero law.
    pub fn boundary_ccdf_near_zero(&self, a: T) -> Result<T, AsymptoticError> {
        let phi = self.phi_near_zero(a)?;
        Ok(phi / self.vol_ball_d_minus_1)
    }

    /// Surface-ensemble tail `nu(xi > a) ~ c_d / (|B_1^(d-1)| a^2)`.
    pub fn boundary_ccdf_tail(&self, a: T) -> Result<T, AsymptoticError> {
        Ok(self.phi_tail(a)? / self.vol_ball_d_minus_1)
    }
}

/// Exact mean free path between collisions and its `r^(d-1)` rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFreePath<T: Scalar> {
    pub length: T,
    pub scaled: T,
}

/// `(1 - r^d |B_1^d|) / (r^(d-1) |B_1^(d-1)|)`.
pub fn mean_free_path_exact<T: Scalar>(dim: usize, r: T) -> Result<MeanFreePath<T>, AsymptoticError> {
    let c = AsymptoticConstants::<T>::new(dim)?;
    if !(r > T::zero() && r < T::lit(0.5)) {
        return Err(AsymptoticError::Radius(r.as_f64()));
    }
    let free_volume = T::one() - r.powi(dim as i32) * c.vol_ball_d;
    let scaled = free_volume / c.vol_ball_d_minus_1;
    Ok(MeanFreePath { length: scaled / r.powi(dim as i32 - 1), scaled })
}

/// Partial small-radius expansion of the billiard-map entropy,
/// `-d(d-1) ln r + (d-1) E_Psi[ln u]`; the bounded remainder is not evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyExpansion {
    pub dim: usize,
    pub radius: f64,
    pub leading: f64,
    pub psi_log_moment: f64,
    pub psi_log_moment_se: f64,
    pub partial_sum: f64,
    pub partial_sum_se: f64,
    pub delta_r_note: &'static str,
}

pub const DELTA_R_NOTE: &str = "remainder Delta_r (limit H(d)) not computed";

pub fn entropy_expansion(
    dim: usize,
    r: f64,
    psi_log_moment: f64,
    psi_log_moment_se: f64,
) -> Result<EntropyExpansion, AsymptoticError> {
    if !(2..=8).contains(&dim) {
        return Err(AsymptoticError::Dimension(dim));
    }
    if !(r > 0.0 && r < 0.5) {
        return Err(AsymptoticError::Radius(r));
    }
    let k = (dim - 1) as f64;
    let leading = -(dim as f64) * k * r.ln();
    Ok(EntropyExpansion {
        dim,
        radius: r,
        leading,
        psi_log_moment,
        psi_log_moment_se,
        partial_sum: leading + k * psi_log_moment,
        partial_sum_se: k * psi_log_moment_se,
        delta_r_note: DELTA_R_NOTE,
    })
}

/// The planar limit constant computed two ways from the same surface-ensemble samples:
/// `-E[ln xi] - ln 2` and `-E[ln(2 xi)]`, the latter being the form obtained for the
/// distribution of `2 xi`. The two agree identically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanarBridge {
    pub direct: f64,
    pub via_doubled: f64,
}

pub fn boca_zaharescu_bridge(dim: usize, xi: &[f64]) -> Result<PlanarBridge, AsymptoticError> {
    if dim != 2 {
        return Err(AsymptoticError::NotPlanar(dim));
    }
    if xi.is_empty() {
        return Err(AsymptoticError::Empty);
    }
    if let Some(&bad) = xi.iter().find(|&&x| !(x > 0.0)) {
        return Err(AsymptoticError::NonPositiveSample(bad));
    }
    let n = xi.len() as f64;
    let log_mean: CompensatedSum = xi.iter().map(|x| x.ln()).collect();
    let doubled_mean: CompensatedSum = xi.iter().map(|x| (2.0 * x).ln()).collect();
    Ok(PlanarBridge {
        direct: -log_mean.value() / n - std::f64::consts::LN_2,
        via_doubled: -doubled_mean.value() / n,
    })
}
