use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Integer vector.
pub type IVec = Vec<i64>;

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Arbitrary-precision integer matrix.
pub type ZMat = Mat<BigInt>;
/// Exact rational matrix.
pub type QMat = Mat<BigRational>;

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = (0..self.rows).map(|i| &self.data[i * self.cols..(i + 1) * self.cols]).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl<T: Clone> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(Self { rows: rows.len(), cols, data: rows.iter().flatten().cloned().collect() })
    }

    /// Matrix whose columns are the given vectors, all of length `dim`.
    pub fn from_cols(dim: usize, cols: &[Vec<T>]) -> Self {
        Self::from_fn(dim, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<U: Clone>(&self, mut f: impl FnMut(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(&mut f).collect() }
    }

    /// Sub-matrix of rows `r0..r1` and columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}

impl<T: Clone + Num> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(d: usize) -> Self {
        Self::from_fn(d, d, |i, j| if i == j { T::one() } else { T::zero() })
    }

    /// A multiple of the identity.
    pub fn is_scalar(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| if i == j { self.get(i, i) == self.get(0, 0) } else { self.get(i, j).is_zero() }))
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| if i == j { self.get(i, j).is_one() } else { self.get(i, j).is_zero() })
            })
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                acc = acc + self.get(i, k).clone() * other.get(k, j).clone();
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    acc = acc + a.clone() * b.clone();
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).clone() + other.get(i, j).clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).clone() - other.get(i, j).clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }
}

impl ZMat {
    pub fn to_q(&self) -> QMat {
        self.map(|x| BigRational::from_integer(x.clone()))
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        for j in 0..n {
                            a.data.swap(k * n + j, i * n + j);
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1).clone()
    }

    /// Converts to `i64`, failing on overflow.
    pub fn to_i64(&self) -> Result<Mat<i64>> {
        let data = self.data.iter().map(|x| x.to_i64().ok_or(Error::Overflow("matrix entry"))).collect::<Result<Vec<_>>>()?;
        Ok(Mat { rows: self.rows, cols: self.cols, data })
    }
}

impl QMat {
    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<QMat> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = QMat::identity(n);
        for c in 0..n {
            let p = (c..n).find(|&r| !a.get(r, c).is_zero()).ok_or(Error::Singular)?;
            if p != c {
                for j in 0..n {
                    a.data.swap(p * n + j, c * n + j);
                    inv.data.swap(p * n + j, c * n + j);
                }
            }
            let pivot = a.get(c, c).clone();
            for j in 0..n {
                a.set(c, j, a.get(c, j) / &pivot);
                inv.set(c, j, inv.get(c, j) / &pivot);
            }
            for r in 0..n {
                if r != c && !a.get(r, c).is_zero() {
                    let f = a.get(r, c).clone();
                    for j in 0..n {
                        a.set(r, j, a.get(r, j) - &f * a.get(c, j));
                        inv.set(r, j, inv.get(r, j) - &f * inv.get(c, j));
                    }
                }
            }
        }
        Ok(inv)
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    /// Integer matrix if every entry is integral.
    pub fn to_z(&self) -> Option<ZMat> {
        self.is_integral().then(|| self.map(|x| x.to_integer()))
    }

    pub fn to_f64(&self) -> Mat<f64> {
        self.map(ratio_to_f64)
    }
}

impl Mat<f64> {
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// Operator norm induced by the max norm (largest absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows).map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, other.cols, |i, j| (0..self.cols).map(|k| self.get(i, k) * other.get(k, j)).sum())
    }
}

/// Nearest double to a big rational, accurate even when numerator and
/// denominator overflow `f64` individually.
pub fn ratio_to_f64(x: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let bits_n = x.numer().bits() as i64;
    let bits_d = x.denom().bits() as i64;
    let shift = bits_n - bits_d - 60;
    let scaled = if shift >= 0 {
        x.numer().abs() / (x.denom() << (shift as usize))
    } else {
        (x.numer().abs() << ((-shift) as usize)) / x.denom()
    };
    let v = scaled.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(shift as i32);
    if x.is_negative() {
        -v
    } else {
        v
    }
}

/// Square integer matrix with `i64` entries; the type of every IFS matrix `R`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix(Mat<i64>);

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl IntMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let m = Mat::from_rows(&rows)?;
        if m.rows != m.cols || m.rows == 0 {
            return Err(Error::DimensionMismatch(format!("matrix is {}x{}, expected square", m.rows, m.cols)));
        }
        Ok(Self(m))
    }

    pub fn scalar(r: i64) -> Self {
        Self(Mat::from_fn(1, 1, |_, _| r))
    }

    pub fn diag(entries: &[i64]) -> Self {
        Self(Mat::from_fn(entries.len(), entries.len(), |i, j| if i == j { entries[i] } else { 0 }))
    }

    pub fn identity(d: usize) -> Self {
        Self(Mat::identity(d))
    }

    pub fn from_mat(m: Mat<i64>) -> Result<Self> {
        if m.rows != m.cols || m.rows == 0 {
            return Err(Error::DimensionMismatch("matrix must be square".into()));
        }
        Ok(Self(m))
    }

    pub fn from_z(m: &ZMat) -> Result<Self> {
        Self::from_mat(m.to_i64()?)
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        *self.0.get(i, j)
    }

    pub fn mat(&self) -> &Mat<i64> {
        &self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.0.to_rows()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn to_z(&self) -> ZMat {
        self.0.map(|&x| BigInt::from(x))
    }

    pub fn to_q(&self) -> QMat {
        self.0.map(|&x| BigRational::from_integer(BigInt::from(x)))
    }

    pub fn to_f64(&self) -> Mat<f64> {
        self.0.map(|&x| x as f64)
    }

    pub fn det(&self) -> BigInt {
        self.to_z().det()
    }

    /// Absolute determinant, failing if it does not fit in 64 bits.
    pub fn abs_det(&self) -> Result<u64> {
        self.det().abs().to_u64().ok_or(Error::Overflow("determinant"))
    }

    /// Exact inverse.
    pub fn inverse(&self) -> Result<QMat> {
        self.to_q().inverse()
    }

    /// `self^k` with overflow detection.
    pub fn pow(&self, k: u32) -> Result<Self> {
        Self::from_z(&self.to_z().pow(k))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Self::from_z(&self.to_z().mul(&other.to_z()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::from_z(&self.to_z().sub(&other.to_z()))
    }

    /// `self * v` with overflow detection.
    pub fn mul_vec(&self, v: &[i64]) -> Result<IVec> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("vector of length {} for a {}x{} matrix", v.len(), self.dim(), self.dim())));
        }
        (0..self.dim())
            .map(|i| {
                let s: i128 = self.0.row(i).iter().zip(v).map(|(&a, &b)| a as i128 * b as i128).sum();
                i64::try_from(s).map_err(|_| Error::Overflow("matrix-vector product"))
            })
            .collect()
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(d)?;
        IntMatrix::new(rows).map_err(serde::de::Error::custom)
    }
}

/// Adds two integer vectors, failing on overflow.
pub fn add_vec(a: &[i64], b: &[i64]) -> Result<IVec> {
    a.iter().zip(b).map(|(x, y)| x.checked_add(*y).ok_or(Error::Overflow("vector sum"))).collect()
}

pub fn sub_vec(a: &[i64], b: &[i64]) -> Result<IVec> {
    a.iter().zip(b).map(|(x, y)| x.checked_sub(*y).ok_or(Error::Overflow("vector difference"))).collect()
}

pub fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn to_rational(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect()
}
