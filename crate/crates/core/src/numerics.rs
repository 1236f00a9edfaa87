//! Complex scalars, fixed-size 4x4 linear algebra and the stochastic
//! reduction map that turns a two-mode probability table into a 2x2 block.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use ndarray::Array2;
pub use num_complex::Complex64 as Complex;

use crate::error::{Error, Result};

/// Tolerance used for every probability-sum check in this module.
pub const PROB_TOL: f64 = 1e-9;

/// Field element usable in [`Mat4`] / [`Vec4`].
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex {
    fn zero() -> Self {
        Complex::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    fn is_finite(self) -> bool {
        Complex::is_finite(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec4<T>(pub [T; 4]);

pub type Vec4R = Vec4<f64>;
pub type Vec4C = Vec4<Complex>;

impl<T: Scalar> Vec4<T> {
    pub fn zero() -> Self {
        Vec4([T::zero(); 4])
    }

    pub fn dot(&self, other: &Self) -> T {
        (0..4).fold(T::zero(), |acc, i| acc + self.0[i] * other.0[i])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == T::zero())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (0..4)
            .map(|i| (self.0[i] - other.0[i]).modulus())
            .fold(0.0, f64::max)
    }
}

impl Vec4R {
    pub fn to_complex(&self) -> Vec4C {
        Vec4(self.0.map(Complex::from))
    }
}

impl<T: Scalar> std::ops::Index<usize> for Vec4<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

/// Dense 4x4 matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4<T>(pub [[T; 4]; 4]);

pub type Mat4R = Mat4<f64>;
pub type Mat4C = Mat4<Complex>;

impl<T: Scalar> Mat4<T> {
    pub fn zero() -> Self {
        Mat4([[T::zero(); 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            m.0[i][i] = T::one();
        }
        m
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.0[i][j]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(|i, j| self.0[i][j].conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].conj())
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self::from_fn(|i, j| (0..4).fold(T::zero(), |acc, k| acc + self.0[i][k] * other.0[k][j]))
    }

    pub fn mul_vec(&self, v: &Vec4<T>) -> Vec4<T> {
        let mut out = [T::zero(); 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).fold(T::zero(), |acc, k| acc + self.0[i][k] * v.0[k]);
        }
        Vec4(out)
    }

    /// Quadratic form `v^T M v` (no conjugation).
    pub fn quadratic_form(&self, v: &Vec4<T>) -> T {
        v.dot(&self.mul_vec(v))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|x| x.modulus().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.0[i][j] - other.0[i][j]).modulus());
            }
        }
        d
    }

    pub fn asymmetry(&self) -> f64 {
        self.max_abs_diff(&self.transpose())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// Exact determinant by LU factorization with partial pivoting.
    pub fn det(&self) -> T {
        let mut a = self.0;
        let mut det = T::one();
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&r, &s| a[r][col].modulus().total_cmp(&a[s][col].modulus()))
                .unwrap();
            if a[pivot][col].modulus() == 0.0 {
                return T::zero();
            }
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            let p = a[col][col];
            det = det * p;
            for r in col + 1..4 {
                let factor = a[r][col] / p;
                for c in col..4 {
                    a[r][c] = a[r][c] - factor * a[col][c];
                }
            }
        }
        det
    }

    /// Singularity threshold `1e-12 * ||m||_F^4`.
    pub fn singular_threshold(&self) -> f64 {
        1e-12 * self.frobenius_norm().powi(4)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    ///
    /// Fails with [`Error::SingularMatrix`] when `|det| <= 1e-12 * ||m||_F^4`.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det().modulus();
        let threshold = self.singular_threshold();
        if det <= threshold || !det.is_finite() {
            return Err(Error::SingularMatrix { det, threshold });
        }
        let mut a = self.0;
        let mut inv = Self::identity().0;
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&r, &s| a[r][col].modulus().total_cmp(&a[s][col].modulus()))
                .unwrap();
            a.swap(pivot, col);
            inv.swap(pivot, col);
            let p = a[col][col];
            for c in 0..4 {
                a[col][c] = a[col][c] / p;
                inv[col][c] = inv[col][c] / p;
            }
            for r in 0..4 {
                if r == col {
                    continue;
                }
                let factor = a[r][col];
                if factor == T::zero() {
                    continue;
                }
                for c in 0..4 {
                    a[r][c] = a[r][c] - factor * a[col][c];
                    inv[r][c] = inv[r][c] - factor * inv[col][c];
                }
            }
        }
        Ok(Mat4(inv))
    }
}

impl<T: Scalar> Add for Mat4<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl<T: Scalar> Sub for Mat4<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

impl Mat4R {
    pub fn to_complex(&self) -> Mat4C {
        Mat4C::from_fn(|i, j| Complex::new(self.0[i][j], 0.0))
    }
}

/// Smallest eigenvalue lower bound check: true when every leading principal
/// minor is positive (Sylvester's criterion for symmetric matrices).
pub fn is_positive_definite(m: &Mat4R) -> bool {
    (1..=4).all(|k| {
        let mut sub = Mat4R::identity();
        for i in 0..k {
            for j in 0..k {
                sub.0[i][j] = m.0[i][j];
            }
        }
        sub.det() > 0.0
    })
}

/// Two-row indicator map over `0..len`: row 0 selects indices in the set,
/// row 1 its complement.
pub fn indicator_map(len: usize, in_set: impl Fn(usize) -> bool) -> Array2<f64> {
    Array2::from_shape_fn((2, len), |(r, c)| {
        let inside = in_set(c);
        if (r == 0) == inside {
            1.0
        } else {
            0.0
        }
    })
}

fn check_stochastic(map: &Array2<f64>, expected_cols: usize, name: &str) -> Result<()> {
    if map.nrows() != 2 || map.ncols() != expected_cols {
        return Err(Error::InvalidStochasticMatrix(format!(
            "{name} has shape {:?}, expected (2, {expected_cols})",
            map.dim()
        )));
    }
    for (c, column) in map.columns().into_iter().enumerate() {
        if column.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidStochasticMatrix(format!(
                "{name} column {c} has an entry outside [0, 1]"
            )));
        }
        let s: f64 = column.sum();
        if (s - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidStochasticMatrix(format!(
                "{name} column {c} sums to {s}"
            )));
        }
    }
    Ok(())
}

/// Reduces a finite probability table `w` (R x C) to a 2x2 probability block
/// `row_map * w * col_map^T`, where both maps are column-stochastic 2-row
/// matrices.
pub fn stochastic_reduce(
    w: &Array2<f64>,
    row_map: &Array2<f64>,
    col_map: &Array2<f64>,
) -> Result<[[f64; 2]; 2]> {
    if w.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidProbability(
            "table has a negative or NaN entry".into(),
        ));
    }
    let total = w.sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidProbability(format!("table sums to {total}")));
    }
    check_stochastic(row_map, w.nrows(), "row map")?;
    check_stochastic(col_map, w.ncols(), "column map")?;

    let block = row_map.dot(w).dot(&col_map.t());
    Ok([[block[[0, 0]], block[[0, 1]]], [block[[1, 0]], block[[1, 1]]]])
}
