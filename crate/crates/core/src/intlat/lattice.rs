use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::hnf::hermite_normal_form;
use super::mat::{Mat, QMat, ZMat};
use crate::error::{Error, Result};

/// A lattice `(1/denom) * basis * Z^r` in `Q^d`.
///
/// The basis is in column Hermite normal form and `gcd(denom, entries) = 1`,
/// so two lattices are equal exactly when their fields are equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    denom: BigInt,
    basis: ZMat,
    pivots: Vec<usize>,
}

impl Lattice {
    /// Lattice generated by integer columns.
    pub fn from_int_generators(dim: usize, gens: &[Vec<BigInt>]) -> Self {
        Self::normalized(dim, BigInt::one(), &ZMat::from_cols(dim, gens))
    }

    pub fn from_i64_generators(dim: usize, gens: &[Vec<i64>]) -> Self {
        let g: Vec<Vec<BigInt>> = gens.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Self::from_int_generators(dim, &g)
    }

    /// Lattice generated by rational columns.
    pub fn from_rational_generators(dim: usize, gens: &[Vec<BigRational>]) -> Self {
        let denom = gens.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let scaled: Vec<Vec<BigInt>> =
            gens.iter().map(|v| v.iter().map(|x| (x * BigRational::from_integer(denom.clone())).to_integer()).collect()).collect();
        Self::normalized(dim, denom, &ZMat::from_cols(dim, &scaled))
    }

    /// The whole of `Z^d`.
    pub fn integer(dim: usize) -> Self {
        Self::normalized(dim, BigInt::one(), &ZMat::identity(dim))
    }

    fn normalized(dim: usize, denom: BigInt, gens: &ZMat) -> Self {
        let hnf = hermite_normal_form(gens);
        let mut basis = hnf.h.block(0, dim, 0, hnf.rank);
        let mut g = denom.clone();
        for i in 0..basis.rows() {
            for j in 0..basis.cols() {
                g = g.gcd(basis.get(i, j));
            }
        }
        let mut denom = denom;
        if !g.is_one() && !g.is_zero() {
            denom = &denom / &g;
            basis = basis.map(|x| x / &g);
        }
        Self { dim, denom, basis, pivots: hnf.pivots }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.dim
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    /// Integer HNF basis; the lattice is `basis / denom`.
    pub fn int_basis(&self) -> &ZMat {
        &self.basis
    }

    /// Basis columns as exact rationals.
    pub fn basis(&self) -> QMat {
        self.basis.map(|x| BigRational::new(x.clone(), self.denom.clone()))
    }

    pub fn is_integral(&self) -> bool {
        self.denom.is_one()
    }

    /// True when the lattice is exactly `Z^d`.
    pub fn is_whole_space(&self) -> bool {
        self.is_full() && self.denom.is_one() && self.basis.det().abs().is_one()
    }

    /// Covolume `|det basis| / denom^d` of a full-rank lattice.
    pub fn covolume(&self) -> Result<BigRational> {
        if !self.is_full() {
            return Err(Error::RankDeficient);
        }
        let d = self.basis.det().abs();
        Ok(BigRational::new(d, num_traits::pow(self.denom.clone(), self.dim)))
    }

    /// Exact membership test for a rational vector.
    pub fn contains(&self, v: &[BigRational]) -> bool {
        assert_eq!(v.len(), self.dim, "vector dimension");
        let scale = BigRational::from_integer(self.denom.clone());
        let mut w: Vec<BigRational> = v.iter().map(|x| x * &scale).collect();
        if w.iter().any(|x| !x.is_integer()) {
            return false;
        }
        for (c, &p) in self.pivots.iter().enumerate() {
            let pivot = BigRational::from_integer(self.basis.get(p, c).clone());
            let coeff = &w[p] / &pivot;
            if !coeff.is_integer() {
                return false;
            }
            if coeff.is_zero() {
                continue;
            }
            for (i, wi) in w.iter_mut().enumerate() {
                *wi -= &coeff * BigRational::from_integer(self.basis.get(i, c).clone());
            }
        }
        w.iter().all(|x| x.is_zero())
    }

    pub fn contains_int(&self, v: &[i64]) -> bool {
        let q: Vec<BigRational> = v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
        self.contains(&q)
    }

    /// True when `other` is a sublattice of `self`.
    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        let b = other.basis();
        (0..b.cols()).all(|j| self.contains(&b.col(j)))
    }

    /// `{x : <x, g> in Z for all g in self}` for a full-rank lattice.
    pub fn dual(&self) -> Result<Lattice> {
        if !self.is_full() {
            return Err(Error::RankDeficient);
        }
        let inv_t = self.basis().inverse()?.transpose();
        let cols: Vec<Vec<BigRational>> = (0..self.dim).map(|j| inv_t.col(j)).collect();
        Ok(Self::from_rational_generators(self.dim, &cols))
    }

    /// Image under an integer matrix acting on columns.
    pub fn image(&self, m: &ZMat) -> Lattice {
        let b = m.to_q().mul(&self.basis());
        let cols: Vec<Vec<BigRational>> = (0..b.cols()).map(|j| b.col(j)).collect();
        Self::from_rational_generators(m.rows(), &cols)
    }
}

/// Serializable description: denominator and integer basis columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSummary {
    pub denom: String,
    pub basis: Vec<Vec<String>>,
}

impl From<&Lattice> for LatticeSummary {
    fn from(l: &Lattice) -> Self {
        Self {
            denom: l.denom.to_string(),
            basis: (0..l.rank()).map(|j| l.basis.col(j).iter().map(|x| x.to_string()).collect()).collect(),
        }
    }
}

/// Integer basis of the rational kernel of `a`, one primitive vector per column.
pub fn rational_kernel(a: &QMat) -> Vec<Vec<BigInt>> {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for c in 0..n {
        if row == m {
            break;
        }
        let Some(p) = (row..m).find(|&i| !r.get(i, c).is_zero()) else { continue };
        if p != row {
            for j in 0..n {
                let t = r.get(p, j).clone();
                r.set(p, j, r.get(row, j).clone());
                r.set(row, j, t);
            }
        }
        let pv = r.get(row, c).clone();
        for j in 0..n {
            r.set(row, j, r.get(row, j) / &pv);
        }
        for i in 0..m {
            if i != row && !r.get(i, c).is_zero() {
                let f = r.get(i, c).clone();
                for j in 0..n {
                    r.set(i, j, r.get(i, j) - &f * r.get(row, j));
                }
            }
        }
        pivot_cols.push(c);
        row += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); n];
            v[f] = BigRational::one();
            for (i, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -r.get(i, f).clone();
            }
            primitive(&v)
        })
        .collect()
}

/// Scales a rational vector to a primitive integer vector with the same direction.
pub fn primitive(v: &[BigRational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Rational matrix from rows of integers, for tests and small helpers.
pub fn qmat(rows: &[Vec<i64>]) -> QMat {
    Mat::from_rows(rows).expect("rectangular rows").map(|&x| BigRational::from_integer(BigInt::from(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn dual_of_3z_is_third_z() {
        let l = Lattice::from_i64_generators(1, &[vec![3]]);
        let d = l.dual().unwrap();
        assert_eq!(d.denom(), &BigInt::from(3));
        assert!(d.contains(&[q(1, 3)]));
        assert!(!d.contains(&[q(1, 6)]));
        assert_eq!(d.dual().unwrap(), l);
    }

    #[test]
    fn dual_of_diagonal_basis() {
        let l = Lattice::from_i64_generators(2, &[vec![2, 0], vec![0, 5]]);
        let d = l.dual().unwrap();
        let expected = Lattice::from_rational_generators(2, &[vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(1, 5)]]);
        assert_eq!(d, expected);
    }

    #[test]
    fn dual_of_whole_space() {
        let z2 = Lattice::integer(2);
        assert_eq!(z2.dual().unwrap(), z2);
        assert!(z2.is_whole_space());
    }

    #[test]
    fn rank_deficient_dual_fails() {
        let l = Lattice::from_i64_generators(2, &[vec![1, 1]]);
        assert_eq!(l.dual(), Err(Error::RankDeficient));
    }

    #[test]
    fn membership() {
        let l = Lattice::from_i64_generators(2, &[vec![2, 1], vec![0, 3]]);
        assert!(l.contains_int(&[2, 4]));
        assert!(!l.contains_int(&[1, 0]));
        assert!(l.contains_int(&[4, -1]));
    }

    #[test]
    fn kernel_of_rank_one() {
        let k = rational_kernel(&qmat(&[vec![1, 2, 3]]));
        assert_eq!(k.len(), 2);
        for v in k {
            let dot = &v[0] + BigInt::from(2) * &v[1] + BigInt::from(3) * &v[2];
            assert!(dot.is_zero());
        }
    }
}
