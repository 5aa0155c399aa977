//! The approximation function
//! `zeta(b, T) = min { N >= 1 : min_{1 <= q <= N} |q b|_Z <= N^2 / T }`
//! where `|x|_Z` is the sup-norm distance from `x` to the integer lattice.
//!
//! `zeta(b, .)` is non-decreasing and unbounded for irrational `b`; for `b` of
//! Diophantine type `kappa` it grows at least like `T^(1 / (kappa + 1))`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::statistics::regression::least_squares;

/// Largest horizon for which float shifts are meaningful.
pub const MAX_HORIZON: f64 = 9_007_199_254_740_992.0; // 2^53
pub const DEFAULT_CAP: u64 = 10_000_000;
/// Largest search cap accepted by [`zeta_fn_oracle`].
pub const ORACLE_CAP: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiophantineError {
    #[error("horizon T = {0} must lie in (0, 2^53]")]
    Horizon(f64),
    #[error("vector must be non-empty with finite components")]
    Vector,
    #[error("search cap must be in 1..={max}, got {got}")]
    Cap { got: u64, max: u64 },
    #[error("zeta exceeded the search cap {cap} at T = {horizon}")]
    Capped { cap: u64, horizon: f64 },
    #[error("horizon grid must be increasing, positive and at most 2^53")]
    Grid,
    #[error("rational vector needs a positive denominator")]
    Denominator,
}

/// `zeta(b, T)` or the marker that no `N <= cap` qualified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Zeta {
    Exact(u64),
    Capped(u64),
}

impl Zeta {
    pub fn exact(self) -> Option<u64> {
        match self {
            Zeta::Exact(n) => Some(n),
            Zeta::Capped(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiophantineQuery {
    b: Vec<f64>,
    horizon: f64,
    cap: u64,
}

impl DiophantineQuery {
    /// Components of `b` are reduced to `[0, 1)`.
    pub fn new(b: &[f64], horizon: f64, cap: u64) -> Result<Self, DiophantineError> {
        if b.is_empty() || b.iter().any(|x| !x.is_finite()) {
            return Err(DiophantineError::Vector);
        }
        if !(horizon > 0.0 && horizon <= MAX_HORIZON) {
            return Err(DiophantineError::Horizon(horizon));
        }
        if cap == 0 || cap as f64 >= MAX_HORIZON {
            return Err(DiophantineError::Cap { got: cap, max: MAX_HORIZON as u64 });
        }
        let b = b.iter().map(|x| x - x.floor()).map(|x| if x >= 1.0 { 0.0 } else { x }).collect();
        Ok(Self { b, horizon, cap })
    }

    pub fn with_default_cap(b: &[f64], horizon: f64) -> Result<Self, DiophantineError> {
        Self::new(b, horizon, DEFAULT_CAP)
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }
}

/// Sup-norm distance from `x` to the nearest integer vector.
pub fn torus_distance(x: &[f64]) -> f64 {
    x.iter()
        .map(|xi| {
            let f = xi - xi.floor();
            f.min(1.0 - f)
        })
        .fold(0.0, f64::max)
}

// Veltkamp/Dekker: a * b = p + e exactly for |a b| well inside the f64 range.
#[inline]
fn two_product(a: f64, b: f64) -> (f64, f64) {
    const SPLIT: f64 = 134_217_729.0; // 2^27 + 1
    let p = a * b;
    let split = |x: f64| {
        let c = SPLIT * x;
        let hi = c - (c - x);
        (hi, x - hi)
    };
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

/// `|q x|_Z` for scalar `x`, rounded once from the exact value.
#[inline]
fn scalar_multiple_distance(q: u64, x: f64) -> f64 {
    let (p, e) = two_product(q as f64, x);
    let head = p - p.round();
    let f = head + e;
    if head.abs() == 0.5 && f.abs() > 0.5 {
        0.5 - e.abs()
    } else {
        f.abs()
    }
}

/// `|q b|_Z` using error-free products, exact before the final rounding for `q < 2^53`.
pub fn multiple_distance(q: u64, b: &[f64]) -> f64 {
    b.iter().map(|&x| scalar_multiple_distance(q, x)).fold(0.0, f64::max)
}

#[inline]
fn within(n: u64, horizon: f64, dist: f64) -> bool {
    let nf = n as f64;
    dist <= nf * nf / horizon
}

/// Incremental scan keeping the running minimum of `|q b|_Z`. Only `q > 0` is scanned:
/// `|(-q) b|_Z = |q b|_Z`.
pub fn zeta_fn(query: &DiophantineQuery) -> Zeta {
    let mut best = f64::INFINITY;
    for n in 1..=query.cap {
        best = best.min(multiple_distance(n, &query.b));
        if within(n, query.horizon, best) {
            return Zeta::Exact(n);
        }
    }
    Zeta::Capped(query.cap)
}

/// Exact `zeta` for a rational vector `numerators / denominator` with integer arithmetic.
pub fn zeta_rational(
    numerators: &[i64],
    denominator: u64,
    horizon: f64,
    cap: u64,
) -> Result<Zeta, DiophantineError> {
    if denominator == 0 {
        return Err(DiophantineError::Denominator);
    }
    if numerators.is_empty() {
        return Err(DiophantineError::Vector);
    }
    if !(horizon > 0.0 && horizon <= MAX_HORIZON) {
        return Err(DiophantineError::Horizon(horizon));
    }
    let den = denominator as i128;
    let mut best = u64::MAX;
    for n in 1..=cap {
        let num = numerators
            .iter()
            .map(|&p| {
                let m = (n as i128 * p as i128).rem_euclid(den);
                m.min(den - m) as u64
            })
            .max()
            .unwrap();
        best = best.min(num);
        if within(n, horizon, best as f64 / denominator as f64) {
            return Ok(Zeta::Exact(n));
        }
    }
    Ok(Zeta::Capped(cap))
}

// b = mantissa / 2^shift exactly; shift = 0 means an integer.
fn dyadic(x: f64) -> (u64, u32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    if e >= 0 {
        (0, 0)
    } else {
        (mantissa, (-e) as u32)
    }
}

/// Independent reference for [`zeta_fn`]: tabulates every `|q b|_Z` as an exact dyadic
/// rational and returns `min_q max(q, N_q)`, where `N_q` is the least `N` with
/// `|q b|_Z <= N^2 / T`, decided in exact integer arithmetic.
pub fn zeta_fn_oracle(query: &DiophantineQuery) -> Result<Zeta, DiophantineError> {
    if query.cap > ORACLE_CAP {
        return Err(DiophantineError::Cap { got: query.cap, max: ORACLE_CAP });
    }
    let (t_mant, t_shift) = {
        // T = t_mant * 2^t_exp
        let bits = query.horizon.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        (BigUint::from(m), e)
    };
    let parts: Vec<(BigUint, u32)> = query.b.iter().map(|&x| {
        let (m, s) = dyadic(x);
        (BigUint::from(m), s)
    }).collect();
    let common = parts.iter().map(|p| p.1).max().unwrap_or(0);
    let modulus = BigUint::one() << common;

    // |q b|_Z = num / 2^common
    let distance = |q: u64| -> BigUint {
        parts
            .iter()
            .map(|(m, s)| {
                let scaled = (m * BigUint::from(q)) << (common - s);
                let r = scaled % &modulus;
                let other = &modulus - &r;
                std::cmp::min(r, other)
            })
            .max()
            .unwrap()
    };

    // num / 2^common <= N^2 / (t_mant 2^t_exp)  <=>  num * t_mant * 2^t_exp <= N^2 2^common
    let holds = |num: &BigUint, n: u64| -> bool {
        let mut lhs = num * &t_mant;
        let mut rhs = BigUint::from(n) * BigUint::from(n);
        let shift = common as i64 - t_shift as i64;
        if shift >= 0 {
            rhs <<= shift as usize;
        } else {
            lhs <<= (-shift) as usize;
        }
        lhs <= rhs
    };

    let mut answer: Option<u64> = None;
    for q in 1..=query.cap {
        if answer.is_some_and(|a| a <= q) {
            break;
        }
        let num = &distance(q);
        // least N >= q satisfying the inequality, searched up to the cap
        let guess = {
            let num_f = num.to_f64().unwrap_or(f64::INFINITY) / 2f64.powi(common as i32);
            let g = (num_f * query.horizon).sqrt().floor();
            if g.is_finite() { (g as u64).clamp(q, query.cap + 1) } else { query.cap + 1 }
        };
        let mut n = guess.saturating_sub(2).max(q);
        while n > q && holds(num, n - 1) {
            n -= 1;
        }
        while n <= query.cap && !holds(num, n) {
            n += 1;
        }
        if n <= query.cap && answer.is_none_or(|a| n < a) {
            answer = Some(n);
        }
    }
    Ok(match answer {
        Some(n) => Zeta::Exact(n),
        None => Zeta::Capped(query.cap),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentProbe {
    /// Slope of `ln zeta` against `ln T`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, u64)>,
}

/// Fits `ln zeta(b, T)` against `ln T` over the grid. Aborts on any capped value.
pub fn diophantine_exponent_probe(b: &[f64], grid: &[f64], cap: u64) -> Result<ExponentProbe, DiophantineError> {
    if grid.len() < 2
        || grid.windows(2).any(|w| !(w[1] > w[0]))
        || grid.iter().any(|&t| !(t > 0.0 && t <= MAX_HORIZON))
    {
        return Err(DiophantineError::Grid);
    }
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid {
        let q = DiophantineQuery::new(b, t, cap)?;
        match zeta_fn(&q) {
            Zeta::Exact(n) => points.push((t, n)),
            Zeta::Capped(cap) => return Err(DiophantineError::Capped { cap, horizon: t }),
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.1 as f64).ln()).collect();
    let fit = least_squares(&xs, &ys).ok_or(DiophantineError::Grid)?;
    Ok(ExponentProbe { slope: fit.slope, intercept: fit.intercept, r_squared: fit.r_squared, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GOLDEN_FRACTION;

    #[test]
    fn torus_distance_examples() {
        assert_eq!(torus_distance(&[0.3, 0.9]), 0.3);
        assert_eq!(torus_distance(&[3.0, -2.0]), 0.0);
        assert_eq!(torus_distance(&[0.5, 0.1]), 0.5);
    }

    #[test]
    fn integer_vectors_have_zeta_one() {
        for t in [1.0, 10.0, 1e9] {
            let q = DiophantineQuery::with_default_cap(&[2.0, -1.0], t).unwrap();
            assert_eq!(zeta_fn(&q), Zeta::Exact(1));
        }
    }

    #[test]
    fn half_needs_two() {
        let q = DiophantineQuery::with_default_cap(&[0.5], 10.0).unwrap();
        assert_eq!(zeta_fn(&q), Zeta::Exact(2));
        assert_eq!(zeta_fn_oracle(&DiophantineQuery::new(&[0.5], 10.0, 100).unwrap()), Ok(Zeta::Exact(2)));
    }

    #[test]
    fn first_step_rule() {
        // |b|_Z <= 1/T gives zeta = 1
        let q = DiophantineQuery::new(&[0.01], 100.0, 10).unwrap();
        assert_eq!(zeta_fn(&q), Zeta::Exact(1));
        let q = DiophantineQuery::new(&[0.01], 101.0, 10).unwrap();
        assert_ne!(zeta_fn(&q), Zeta::Exact(1));
    }

    #[test]
    fn golden_matches_oracle() {
        let q = DiophantineQuery::new(&[GOLDEN_FRACTION], 1e6, ORACLE_CAP).unwrap();
        let z = zeta_fn(&q);
        assert_eq!(Ok(z), zeta_fn_oracle(&q));
        let n = z.exact().unwrap() as f64;
        // roughly (T / sqrt 5)^(1/3)
        assert!(n > 30.0 && n < 200.0, "{n}");
    }

    #[test]
    fn cap_is_flagged() {
        let q = DiophantineQuery::new(&[GOLDEN_FRACTION], 1e12, 50).unwrap();
        assert_eq!(zeta_fn(&q), Zeta::Capped(50));
        assert_eq!(zeta_fn_oracle(&q), Ok(Zeta::Capped(50)));
        let big = DiophantineQuery::new(&[0.1], 10.0, ORACLE_CAP + 1).unwrap();
        assert!(zeta_fn_oracle(&big).is_err());
    }

    #[test]
    fn query_validation() {
        assert!(DiophantineQuery::new(&[0.1], 0.0, 10).is_err());
        assert!(DiophantineQuery::new(&[0.1], 1e17, 10).is_err());
        assert!(DiophantineQuery::new(&[], 10.0, 10).is_err());
        assert!(DiophantineQuery::new(&[f64::NAN], 10.0, 10).is_err());
        assert_eq!(DiophantineQuery::new(&[1.25, -0.25], 10.0, 10).unwrap().b(), &[0.25, 0.75]);
    }

    #[test]
    fn multiple_distance_is_exact_for_large_multiples() {
        // naive q * x loses the fractional part near q = 2^40
        let x = 0.1;
        let q = 1u64 << 40;
        let exact = {
            let (m, s) = dyadic(x);
            let scaled = m as u128 * q as u128;
            let r = scaled % (1u128 << s);
            let r = r.min((1u128 << s) - r);
            r as f64 / 2f64.powi(s as i32)
        };
        assert_eq!(multiple_distance(q, &[x]), exact);
    }

    #[test]
    fn rational_plateau() {
        for t in [1e2, 1e4, 1e8, 1e12, 1e15] {
            let z = zeta_rational(&[3], 7, t, 1000).unwrap().exact().unwrap();
            assert!(z <= 7);
            let zf = zeta_fn(&DiophantineQuery::new(&[3.0 / 7.0], t, 1000).unwrap()).exact().unwrap();
            assert!(zf <= 7);
        }
        assert_eq!(zeta_rational(&[3], 7, 1e15, 100).unwrap(), Zeta::Exact(7));
    }

    #[test]
    fn probe_rejects_bad_grid() {
        assert!(diophantine_exponent_probe(&[0.3], &[10.0, 5.0], 100).is_err());
        assert!(diophantine_exponent_probe(&[0.3], &[10.0], 100).is_err());
    }
}
