use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::hnf::hermite_normal_form;
use super::lattice::Lattice;
use super::mat::{ratio_to_f64, IVec, IntMatrix, QMat, ZMat};
use crate::error::{Error, Result};

/// Translates `digits` so that the lexicographically smallest one becomes 0.
///
/// Returns the translated digits and the removed offset, or `None` when 0 is
/// already present.
pub fn translate_to_origin(digits: &[IVec]) -> (Vec<IVec>, Option<IVec>) {
    let d = digits.first().map_or(0, |b| b.len());
    if digits.iter().any(|b| b.iter().all(|&x| x == 0)) {
        return (digits.to_vec(), None);
    }
    let b0 = digits.iter().min().cloned().unwrap_or_else(|| vec![0; d]);
    let shifted = digits.iter().map(|b| b.iter().zip(&b0).map(|(x, y)| x - y).collect()).collect();
    (shifted, Some(b0))
}

/// `Z[R, B]`: the lattice generated by `R^j b` for `b` in `B`, `0 <= j < d`.
///
/// Requires `0 in B`. R-invariance is checked exactly before returning.
pub fn smallest_invariant_lattice(r: &IntMatrix, digits: &[IVec]) -> Result<Lattice> {
    let d = r.dim();
    if !digits.iter().any(|b| b.iter().all(|&x| x == 0)) {
        return Err(Error::InvalidInput("smallest_invariant_lattice needs 0 in B; translate first".into()));
    }
    let rz = r.to_z();
    let mut gens: Vec<Vec<BigInt>> = Vec::new();
    for b in digits {
        let mut v: Vec<BigInt> = b.iter().map(|&x| BigInt::from(x)).collect();
        for _ in 0..d {
            gens.push(v.clone());
            v = rz.mul_vec(&v);
        }
    }
    let lat = Lattice::from_int_generators(d, &gens);
    let basis = lat.basis();
    let image = r.to_q().mul(&basis);
    for j in 0..image.cols() {
        if !lat.contains(&image.col(j)) {
            return Err(Error::NotInvariant);
        }
    }
    Ok(lat)
}

/// A change of coordinates `x -> m x` applied to an IFS.
///
/// Digits map as `B~ = m B`, the matrix as `R~ = m R m^{-1}` and dual digits
/// as `L~ = (m^T)^{-1} L`. A spectrum `L~` of the new measure pulls back to
/// `m^T L~`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugationRecord {
    pub m: QMat,
    pub m_inv: QMat,
    /// Offset subtracted from `B` before the change of coordinates.
    pub translation: Option<IVec>,
}

impl ConjugationRecord {
    pub fn identity(d: usize) -> Self {
        Self { m: QMat::identity(d), m_inv: QMat::identity(d), translation: None }
    }

    pub fn from_unimodular(m: &ZMat, m_inv: &ZMat) -> Self {
        Self { m: m.to_q(), m_inv: m_inv.to_q(), translation: None }
    }

    /// Both `m` and `m_inv` are integral with determinant `+-1`.
    pub fn is_unimodular(&self) -> bool {
        self.m.is_integral() && self.m_inv.is_integral()
    }

    pub fn is_identity(&self) -> bool {
        self.m.is_identity() && self.translation.is_none()
    }

    pub fn conjugate_matrix(&self, r: &IntMatrix) -> QMat {
        self.m.mul(&r.to_q()).mul(&self.m_inv)
    }

    pub fn map_digit(&self, b: &[i64]) -> Vec<BigRational> {
        self.m.mul_vec(&super::mat::to_rational(b))
    }

    pub fn map_dual(&self, l: &[i64]) -> Vec<BigRational> {
        self.m_inv.transpose().mul_vec(&super::mat::to_rational(l))
    }

    /// Frequency in the original coordinates of a frequency of the conjugated measure.
    pub fn pull_back_frequency(&self, lambda: &[BigRational]) -> Vec<BigRational> {
        self.m.transpose().mul_vec(lambda)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ConjugationRecord) -> ConjugationRecord {
        ConjugationRecord { m: next.m.mul(&self.m), m_inv: self.m_inv.mul(&next.m_inv), translation: self.translation.clone() }
    }

    pub fn summary(&self) -> ConjugationSummary {
        let show = |m: &QMat| m.to_rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
        ConjugationSummary { m: show(&self.m), m_inv: show(&self.m_inv), translation: self.translation.clone(), unimodular: self.is_unimodular() }
    }
}

/// Serializable form of a [`ConjugationRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugationSummary {
    pub m: Vec<Vec<String>>,
    pub m_inv: Vec<Vec<String>>,
    pub translation: Option<IVec>,
    pub unimodular: bool,
}

/// Output of [`reduce_to_full`].
#[derive(Debug, Clone)]
pub struct Reduction {
    pub record: ConjugationRecord,
    /// `Z[R, B]` of the (translated) input.
    pub lattice: Lattice,
    /// Conjugated full matrix `m R m^{-1}`.
    pub r_full: QMat,
    pub reduced_dim: usize,
    /// Leading `r x r` block of `r_full`.
    pub r: IntMatrix,
    pub digits: Vec<IVec>,
    pub dual: Option<Vec<IVec>>,
}

impl Reduction {
    pub fn is_trivial(&self) -> bool {
        self.record.is_identity()
    }
}

/// Conjugates `(R, B, L)` so that the invariant lattice of the result is `Z^r`.
///
/// Rank-deficient `Z[R,B]` is first mapped onto `Z^r x {0}` by a unimodular
/// matrix; a full-rank `Z[R,B] = M Z^r` is then absorbed by `x -> M^{-1} x`.
pub fn reduce_to_full(r: &IntMatrix, digits: &[IVec], dual: Option<&[IVec]>) -> Result<Reduction> {
    let d = r.dim();
    let (b0, translation) = translate_to_origin(digits);
    let lattice = smallest_invariant_lattice(r, &b0)?;
    let rank = lattice.rank();
    if rank == 0 {
        return Err(Error::InvalidInput("digit set {0} generates the zero lattice".into()));
    }

    // Step 1: unimodular M1 with M1 Z[R,B] in Z^rank x {0}.
    let mut record = ConjugationRecord::identity(d);
    if rank < d {
        let hnf = hermite_normal_form(&lattice.int_basis().transpose());
        let m1 = hnf.u.transpose();
        let m1_inv = m1.to_q().inverse()?.to_z().ok_or(Error::Inconsistent("non-unimodular transform".into()))?;
        record = ConjugationRecord::from_unimodular(&m1, &m1_inv);
    }
    let r1 = record.conjugate_matrix(r);
    let a1 = r1.block(0, rank, 0, rank);
    for i in rank..d {
        for j in 0..rank {
            if !r1.get(i, j).is_zero() {
                return Err(Error::Inconsistent("conjugated matrix is not block triangular".into()));
            }
        }
    }
    let projected: Vec<Vec<BigRational>> = b0.iter().map(|b| record.map_digit(b)[..rank].to_vec()).collect();

    // Step 2: absorb the lattice basis of the projected digits.
    let proj_lat = Lattice::from_rational_generators(rank, &projected);
    let proj_lat = invariant_closure(&a1, &proj_lat)?;
    if !proj_lat.is_whole_space() {
        let basis = proj_lat.basis();
        let inv = basis.inverse()?;
        let mut m2 = QMat::identity(d);
        let mut m2_inv = QMat::identity(d);
        for i in 0..rank {
            for j in 0..rank {
                m2.set(i, j, inv.get(i, j).clone());
                m2_inv.set(i, j, basis.get(i, j).clone());
            }
        }
        record = record.then(&ConjugationRecord { m: m2, m_inv: m2_inv, translation: None });
    }
    record.translation = translation;

    let r_full = record.conjugate_matrix(r);
    let block = r_full.block(0, rank, 0, rank).to_z().ok_or(Error::Inconsistent("reduced matrix is not integral".into()))?;
    let r_red = IntMatrix::from_z(&block)?;
    let to_ints = |v: Vec<BigRational>| -> Result<IVec> {
        v.iter()
            .map(|x| {
                if !x.is_integer() {
                    return Err(Error::Inconsistent("reduced digit is not integral".into()));
                }
                num_traits::ToPrimitive::to_i64(&x.to_integer()).ok_or(Error::Overflow("reduced digit"))
            })
            .collect()
    };
    let new_digits = b0.iter().map(|b| to_ints(record.map_digit(b)[..rank].to_vec())).collect::<Result<Vec<_>>>()?;
    let new_dual = match dual {
        Some(l) => Some(l.iter().map(|x| to_ints(record.map_dual(x)[..rank].to_vec())).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    Ok(Reduction { record, lattice, r_full, reduced_dim: rank, r: r_red, digits: new_digits, dual: new_dual })
}

/// Smallest `a`-invariant lattice containing `lat`.
fn invariant_closure(a: &QMat, lat: &Lattice) -> Result<Lattice> {
    let d = lat.dim();
    let basis = lat.basis();
    let mut gens: Vec<Vec<BigRational>> = Vec::new();
    for j in 0..basis.cols() {
        let mut v = basis.col(j);
        for _ in 0..d {
            gens.push(v.clone());
            v = a.mul_vec(&v);
        }
    }
    Ok(Lattice::from_rational_generators(d, &gens))
}

/// Undoes a reduction: returns `(R, B)` rebuilt from the conjugated full data.
pub fn undo_reduction(red: &Reduction, full_digits: &[Vec<BigRational>]) -> (QMat, Vec<Vec<BigRational>>) {
    let r = red.record.m_inv.mul(&red.r_full).mul(&red.record.m);
    let mut b: Vec<Vec<BigRational>> = full_digits.iter().map(|x| red.record.m_inv.mul_vec(x)).collect();
    if let Some(t) = &red.record.translation {
        for v in &mut b {
            for (x, &s) in v.iter_mut().zip(t) {
                *x += BigRational::from_integer(BigInt::from(s));
            }
        }
    }
    (r, b)
}

/// Rational matrix as nested `f64` rows.
pub fn qmat_to_f64_rows(m: &QMat) -> Vec<Vec<f64>> {
    m.to_rows().iter().map(|r| r.iter().map(ratio_to_f64).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Signed};

    #[test]
    fn invariant_lattices() {
        let jp = smallest_invariant_lattice(&IntMatrix::scalar(4), &[vec![0], vec![2]]).unwrap();
        assert_eq!(jp, Lattice::from_i64_generators(1, &[vec![2]]));
        let r = IntMatrix::new(vec![vec![4, 0], vec![1, 2]]).unwrap();
        let b = vec![vec![0, 0], vec![0, 3], vec![1, 0], vec![1, 3]];
        assert!(smallest_invariant_lattice(&r, &b).unwrap().is_whole_space());
        assert!(smallest_invariant_lattice(&IntMatrix::scalar(2), &[vec![0], vec![1]]).unwrap().is_whole_space());
    }

    #[test]
    fn gcd_oracle_in_one_dimension() {
        for (r, b) in [(4i64, vec![0i64, 6, 9]), (3, vec![0, 4, 10]), (5, vec![0, 15])] {
            let g = b.iter().fold(0i64, |acc, &x| num_integer::gcd(acc, x));
            let digits: Vec<IVec> = b.iter().map(|&x| vec![x]).collect();
            let lat = smallest_invariant_lattice(&IntMatrix::scalar(r), &digits).unwrap();
            assert_eq!(lat, Lattice::from_i64_generators(1, &[vec![g]]));
        }
    }

    #[test]
    fn jp_reduces_by_scalar_two() {
        let red = reduce_to_full(&IntMatrix::scalar(4), &[vec![0], vec![2]], Some(&[vec![0], vec![1]])).unwrap();
        assert_eq!(red.digits, vec![vec![0], vec![1]]);
        assert_eq!(red.dual, Some(vec![vec![0], vec![2]]));
        assert_eq!(red.r, IntMatrix::scalar(4));
        assert_eq!(red.record.m_inv, crate::intlat::lattice::qmat(&[vec![2]]));
        assert!(smallest_invariant_lattice(&red.r, &red.digits).unwrap().is_whole_space());
    }

    #[test]
    fn already_full_is_identity() {
        let red = reduce_to_full(&IntMatrix::scalar(2), &[vec![0], vec![1]], None).unwrap();
        assert!(red.is_trivial());
    }

    #[test]
    fn rank_deficient_projects() {
        let red = reduce_to_full(&IntMatrix::diag(&[2, 3]), &[vec![0, 0], vec![1, 0]], None).unwrap();
        assert_eq!(red.reduced_dim, 1);
        assert_eq!(red.r, IntMatrix::scalar(2));
        assert_eq!(red.digits, vec![vec![0], vec![1]]);
    }

    #[test]
    fn round_trip_recovers_input() {
        let r = IntMatrix::new(vec![vec![2, 1], vec![0, 3]]).unwrap();
        let b = vec![vec![1, 0], vec![3, 0], vec![1, 6]];
        let red = reduce_to_full(&r, &b, None).unwrap();
        let (b0, _) = translate_to_origin(&b);
        let full: Vec<Vec<BigRational>> = b0.iter().map(|x| red.record.map_digit(x)).collect();
        let (r_back, b_back) = undo_reduction(&red, &full);
        assert_eq!(r_back, r.to_q());
        let expected: Vec<Vec<BigRational>> = b.iter().map(|x| crate::intlat::mat::to_rational(x)).collect();
        assert_eq!(b_back, expected);
        assert!(red.record.m.mul(&red.record.m_inv).is_identity());
        assert!(red.record.m_inv.get(0, 0).abs() >= BigRational::one());
    }
}
