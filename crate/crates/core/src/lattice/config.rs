use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{GeometryError, LatticeIndex, Vector, MAX_DIM};
use crate::scalar::Scalar;

/// `(sqrt(5) - 1) / 2`, the fractional part of the golden ratio.
pub const GOLDEN_FRACTION: f64 = 0.618_033_988_749_894_9;

const UNIMODULAR_TOL: f64 = 1e-12;
const ENUMERATION_BUDGET: u64 = 4_000_000;

/// Arithmetic type of the affine shift `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaClass {
    Integer,
    Rational,
    Irrational,
}

/// Affine shift of the obstacle lattice.
///
/// `Irrational` holds binary64 values; it means "irrational at machine precision" and
/// every Diophantine statement about it is capped at horizons `T <= 2^53`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shift {
    Integer(Vec<i64>),
    Rational { numerators: Vec<i64>, denominator: u64 },
    Irrational(Vec<f64>),
}

impl Shift {
    pub fn zero(dim: usize) -> Self {
        Shift::Integer(vec![0; dim])
    }

    /// Every component equal to the golden fraction.
    pub fn golden(dim: usize) -> Self {
        Shift::Irrational(vec![GOLDEN_FRACTION; dim])
    }

    /// Classifies a float vector: all-integer vectors become `Integer`, anything else is
    /// treated as irrational at machine precision.
    pub fn from_floats(values: Vec<f64>) -> Self {
        if values.iter().all(|x| x.fract() == 0.0 && x.abs() < 9.0e15) {
            Shift::Integer(values.iter().map(|&x| x as i64).collect())
        } else {
            Shift::Irrational(values)
        }
    }

    pub fn class(&self) -> AlphaClass {
        match self {
            Shift::Integer(_) => AlphaClass::Integer,
            Shift::Rational { .. } => AlphaClass::Rational,
            Shift::Irrational(_) => AlphaClass::Irrational,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shift::Integer(v) => v.len(),
            Shift::Rational { numerators, .. } => numerators.len(),
            Shift::Irrational(v) => v.len(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Shift::Integer(v) => v.iter().map(|&x| x as f64).collect(),
            Shift::Rational { numerators, denominator } => numerators
                .iter()
                .map(|&p| p as f64 / *denominator as f64)
                .collect(),
            Shift::Irrational(v) => v.clone(),
        }
    }

    fn validate(&self, dim: usize) -> Result<(), GeometryError> {
        if self.dim() != dim {
            return Err(GeometryError::Shape { expected: dim, got: self.dim() });
        }
        match self {
            Shift::Rational { denominator: 0, .. } => Err(GeometryError::ZeroDenominator),
            Shift::Irrational(v) if v.iter().any(|x| !x.is_finite()) => {
                Err(GeometryError::NonFiniteShift)
            }
            _ => Ok(()),
        }
    }
}

/// Result of [`shortest_vector_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShortestVector {
    pub length: f64,
    /// `false` when only the certified lower bound `sigma_min(M)` could be afforded.
    pub exact: bool,
}

struct BasisInfo {
    inverse: Vec<f64>,
    sigma_max: f64,
    sigma_min: f64,
}

fn check_dim(dim: usize) -> Result<(), GeometryError> {
    if (2..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(GeometryError::UnsupportedDimension(dim))
    }
}

fn analyse_basis(dim: usize, basis: &[f64]) -> Result<BasisInfo, GeometryError> {
    check_dim(dim)?;
    if basis.len() != dim * dim {
        return Err(GeometryError::Shape { expected: dim * dim, got: basis.len() });
    }
    let m = DMatrix::from_row_slice(dim, dim, basis);
    let det = m.determinant();
    if !det.is_finite() || (det - 1.0).abs() > UNIMODULAR_TOL {
        return Err(GeometryError::NotUnimodular(det));
    }
    let inv = m.clone().try_inverse().ok_or(GeometryError::NotUnimodular(det))?;
    let sv = m.singular_values();
    let sigma_max = sv.max();
    let sigma_min = sv.min();
    let mut inverse = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            inverse.push(inv[(i, j)]);
        }
    }
    Ok(BasisInfo { inverse, sigma_max, sigma_min })
}

/// Calls `f` on every integer vector in `[-k, k]^dim`.
pub(crate) fn for_each_in_box(dim: usize, center: &[i64], k: i64, mut f: impl FnMut(&[i64])) {
    let mut z: Vec<i64> = center.iter().map(|c| c - k).collect();
    loop {
        f(&z);
        let mut axis = 0;
        loop {
            if axis == dim {
                return;
            }
            z[axis] += 1;
            if z[axis] <= center[axis] + k {
                break;
            }
            z[axis] = center[axis] - k;
            axis += 1;
        }
    }
}

fn row_norm(basis: &[f64], dim: usize, z: &[i64]) -> f64 {
    (0..dim)
        .map(|j| {
            let x: f64 = (0..dim).map(|i| z[i] as f64 * basis[i * dim + j]).sum();
            x * x
        })
        .sum::<f64>()
        .sqrt()
}

/// Length of the shortest nonzero vector of `Z^d M` (rows of `basis`, row-major).
///
/// Enumerates `|z|_inf <= K` with `K = floor(min_row_norm * sigma_max(M^-1))`, which
/// contains every vector no longer than the shortest basis row, so the minimum is exact.
/// When that box exceeds the enumeration budget, returns the lower bound `sigma_min(M)`.
pub fn shortest_vector_bound(dim: usize, basis: &[f64]) -> Result<ShortestVector, GeometryError> {
    let info = analyse_basis(dim, basis)?;
    let min_row = (0..dim)
        .map(|i| basis[i * dim..(i + 1) * dim].iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(f64::INFINITY, f64::min);
    let k = (min_row / info.sigma_min * (1.0 + 1e-12)).floor().max(1.0) as i64;
    let count = (2 * k as u64 + 1).checked_pow(dim as u32);
    match count {
        Some(c) if c <= ENUMERATION_BUDGET => {
            let mut best = f64::INFINITY;
            for_each_in_box(dim, &vec![0; dim], k, |z| {
                if z.iter().any(|&x| x != 0) {
                    best = best.min(row_norm(basis, dim, z));
                }
            });
            Ok(ShortestVector { length: best, exact: true })
        }
        _ => Ok(ShortestVector { length: info.sigma_min, exact: false }),
    }
}

/// The obstacle array `(Z^d + alpha) M + B_r`, immutable after construction.
#[derive(Debug, Clone)]
pub struct LatticeConfig<T: Scalar> {
    dim: usize,
    basis: Vec<T>,
    inverse: Vec<T>,
    basis_f64: Vec<f64>,
    identity: bool,
    shift: Shift,
    alpha: Vec<T>,
    radius: T,
    shortest: ShortestVector,
    sigma_max: f64,
    sigma_min: f64,
    /// Offsets `o` such that the obstacle at cell `k + o` may intersect cell `k`.
    window: Vec<LatticeIndex>,
}

impl<T: Scalar> LatticeConfig<T> {
    /// The cubic lattice `Z^d` with the given shift.
    pub fn cubic(dim: usize, shift: Shift, radius: f64) -> Result<Self, GeometryError> {
        check_dim(dim)?;
        let mut basis = vec![0.0; dim * dim];
        for i in 0..dim {
            basis[i * dim + i] = 1.0;
        }
        Self::new(dim, basis, shift, radius)
    }

    /// `basis` holds the rows of `M` in row-major order.
    pub fn new(dim: usize, basis: Vec<f64>, shift: Shift, radius: f64) -> Result<Self, GeometryError> {
        let info = analyse_basis(dim, &basis)?;
        shift.validate(dim)?;
        if !radius.is_finite() || radius < 0.0 {
            return Err(GeometryError::InvalidRadius(radius));
        }
        let shortest = shortest_vector_bound(dim, &basis)?;
        if 2.0 * radius >= shortest.length {
            return Err(GeometryError::Overlap { diameter: 2.0 * radius, shortest: shortest.length });
        }
        let identity = (0..dim)
            .all(|i| (0..dim).all(|j| basis[i * dim + j] == if i == j { 1.0 } else { 0.0 }));
        let window = Self::build_window(dim, radius / info.sigma_min);
        Ok(Self {
            dim,
            basis: basis.iter().map(|&x| T::lit(x)).collect(),
            inverse: info.inverse.iter().map(|&x| T::lit(x)).collect(),
            basis_f64: basis,
            identity,
            alpha: shift.to_f64().into_iter().map(T::lit).collect(),
            shift,
            radius: T::lit(radius),
            shortest,
            sigma_max: info.sigma_max,
            sigma_min: info.sigma_min,
            window,
        })
    }

    /// Same lattice and shift with another obstacle radius.
    pub fn with_radius(&self, radius: f64) -> Result<Self, GeometryError> {
        Self::new(self.dim, self.basis_f64.clone(), self.shift.clone(), radius)
    }

    // A ball of radius r maps into a ball of radius r * sigma_max(M^-1) = r / sigma_min(M)
    // in lattice coordinates; keep every offset whose ball can reach the unit cell.
    fn build_window(dim: usize, reach: f64) -> Vec<LatticeIndex> {
        let reach = reach * (1.0 + 1e-9) + 1e-12;
        let k = (0.5 + reach).floor() as i64;
        let mut window: Vec<LatticeIndex> = Vec::new();
        for_each_in_box(dim, &vec![0; dim], k, |o| {
            let d2: f64 = o
                .iter()
                .map(|&x| {
                    let gap = (x.abs() as f64 - 0.5).max(0.0);
                    gap * gap
                })
                .sum();
            if d2 <= reach * reach {
                window.push(o.iter().copied().collect());
            }
        });
        window.sort_by_key(|o| o.iter().map(|x| x.abs()).sum::<i64>());
        window
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn radius_f64(&self) -> f64 {
        self.radius.as_f64()
    }

    pub fn basis(&self) -> &[T] {
        &self.basis
    }

    pub fn basis_f64(&self) -> &[f64] {
        &self.basis_f64
    }

    pub fn inverse(&self) -> &[T] {
        &self.inverse
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn shift(&self) -> &Shift {
        &self.shift
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn alpha_class(&self) -> AlphaClass {
        self.shift.class()
    }

    pub fn shortest_vector(&self) -> ShortestVector {
        self.shortest
    }

    /// Condition number `sigma_max(M) / sigma_min(M)`.
    pub fn condition_number(&self) -> f64 {
        self.sigma_max / self.sigma_min
    }

    /// `sigma_max(M^-1)`: how far lattice coordinates move per unit of real length.
    pub fn inverse_norm(&self) -> f64 {
        1.0 / self.sigma_min
    }

    pub fn window(&self) -> &[LatticeIndex] {
        &self.window
    }

    /// Real-space centre `(z + alpha) M` of obstacle `z`.
    #[inline]
    pub fn center_into(&self, z: &[i64], out: &mut [T]) {
        let d = self.dim;
        if self.identity {
            for j in 0..d {
                out[j] = T::from_int(z[j]) + self.alpha[j];
            }
        } else {
            for o in out.iter_mut().take(d) {
                *o = T::zero();
            }
            for i in 0..d {
                let zi = T::from_int(z[i]) + self.alpha[i];
                for j in 0..d {
                    out[j] = out[j] + zi * self.basis[i * d + j];
                }
            }
        }
    }

    pub fn center(&self, z: &[i64]) -> Vector<T> {
        let mut out: Vector<T> = (0..self.dim).map(|_| T::zero()).collect();
        self.center_into(z, &mut out);
        out
    }

    /// Lattice coordinates `x M^-1 - alpha`; obstacle centres sit at integer points.
    pub fn to_lattice_coords(&self, x: &[T]) -> Vector<T> {
        let d = self.dim;
        let mut y: Vector<T> = (0..d).map(|_| T::zero()).collect();
        if self.identity {
            for j in 0..d {
                y[j] = x[j] - self.alpha[j];
            }
        } else {
            for i in 0..d {
                for j in 0..d {
                    y[j] = y[j] + x[i] * self.inverse[i * d + j];
                }
            }
            for j in 0..d {
                y[j] = y[j] - self.alpha[j];
            }
        }
        y
    }

    /// Real-space point `(y + alpha) M` for lattice coordinates `y`.
    pub fn from_lattice_coords(&self, y: &[T]) -> Vector<T> {
        let d = self.dim;
        let mut x: Vector<T> = (0..d).map(|_| T::zero()).collect();
        if self.identity {
            for j in 0..d {
                x[j] = y[j] + self.alpha[j];
            }
        } else {
            for i in 0..d {
                let yi = y[i] + self.alpha[i];
                for j in 0..d {
                    x[j] = x[j] + yi * self.basis[i * d + j];
                }
            }
        }
        x
    }

    /// Direction in lattice coordinates, `v M^-1`.
    pub fn to_lattice_direction(&self, v: &[T]) -> Vector<T> {
        let d = self.dim;
        if self.identity {
            return v.iter().copied().take(d).collect();
        }
        let mut w: Vector<T> = (0..d).map(|_| T::zero()).collect();
        for i in 0..d {
            for j in 0..d {
                w[j] = w[j] + v[i] * self.inverse[i * d + j];
            }
        }
        w
    }

    /// Index of the cell `round(x M^-1 - alpha)` containing `x`.
    pub fn cell_of(&self, x: &[T]) -> LatticeIndex {
        self.to_lattice_coords(x)
            .iter()
            .map(|y| y.round().to_i64().expect("finite lattice coordinate"))
            .collect()
    }

    /// Nearest obstacle to `x` among those that can overlap its cell, with the distance
    /// to its centre. Any obstacle containing `x` is always among the candidates.
    pub fn nearest_obstacle(&self, x: &[T], skip: Option<&[i64]>) -> Option<(LatticeIndex, T)> {
        let cell = self.cell_of(x);
        let mut c: Vector<T> = (0..self.dim).map(|_| T::zero()).collect();
        let mut best: Option<(LatticeIndex, T)> = None;
        for o in &self.window {
            let z: LatticeIndex = cell.iter().zip(o).map(|(a, b)| a + b).collect();
            if skip.is_some_and(|s| s == z.as_slice()) {
                continue;
            }
            self.center_into(&z, &mut c);
            let dist = x
                .iter()
                .zip(&c)
                .fold(T::zero(), |acc, (a, b)| acc + (*a - *b) * (*a - *b))
                .sqrt();
            if best.as_ref().is_none_or(|(_, d)| dist < *d) {
                best = Some((z, dist));
            }
        }
        best
    }
}
