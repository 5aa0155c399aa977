//! Gamma at half-integers, Riemann zeta and unit ball volumes.

use crate::scalar::Scalar;

/// `Gamma(twice / 2)` for a positive integer `twice`, by exact recurrence from
/// `Gamma(1) = 1` and `Gamma(1/2) = sqrt(pi)`.
pub fn gamma_half_integer<T: Scalar>(twice: u32) -> T {
    assert!(twice > 0, "Gamma has a pole at 0");
    let (mut value, mut x) = if twice.is_multiple_of(2) { (T::one(), T::one()) } else { (T::PI().sqrt(), T::lit(0.5)) };
    let target = T::from_u32(twice).unwrap() / T::lit(2.0);
    while x < target {
        value = value * x;
        x = x + T::one();
    }
    value
}

// B_2, B_4, ..., B_14
const BERNOULLI: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// Riemann zeta for real `s > 1`: direct sum to `N = 20` plus an Euler-Maclaurin tail.
pub fn riemann_zeta<T: Scalar>(s: T) -> T {
    assert!(s > T::one(), "zeta(s) requires s > 1");
    const N: i64 = 20;
    let n = T::from_int(N);
    // tail first, smallest terms first
    let mut tail = T::zero();
    let mut rising = s; // s (s+1) ... (s + 2k - 2)
    let mut fact = T::lit(2.0); // (2k)!
    let mut power = n.powf(-s - T::one()); // N^(-s-2k+1)
    let mut terms = [T::zero(); BERNOULLI.len()];
    for (k, b) in BERNOULLI.iter().enumerate() {
        terms[k] = T::lit(*b) / fact * rising * power;
        let kk = T::from_int(2 * k as i64 + 2);
        rising = rising * (s + kk - T::one()) * (s + kk);
        fact = fact * (kk + T::one()) * (kk + T::lit(2.0));
        power = power / (n * n);
    }
    for t in terms.iter().rev() {
        tail = tail + *t;
    }
    tail = tail + n.powf(-s) / T::lit(2.0) + n.powf(T::one() - s) / (s - T::one());
    let mut sum = tail;
    for k in (1..N).rev() {
        sum = sum + T::from_int(k).powf(-s);
    }
    sum
}

/// Volume `|B_1^k| = pi^(k/2) / Gamma(k/2 + 1)` of the unit ball in `R^k`.
pub fn unit_ball_volume<T: Scalar>(k: u32) -> T {
    T::PI().powf(T::from_u32(k).unwrap() / T::lit(2.0)) / gamma_half_integer::<T>(k + 2)
}

/// Surface area `|S_1^(d-1)| = 2 pi^(d/2) / Gamma(d/2)` of the unit sphere in `R^d`.
pub fn unit_sphere_area<T: Scalar>(d: u32) -> T {
    T::lit(2.0) * T::PI().powf(T::from_u32(d).unwrap() / T::lit(2.0)) / gamma_half_integer::<T>(d)
}
