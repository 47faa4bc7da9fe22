use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::mat::ZMat;

/// Column Hermite normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hnf {
    /// `A * U`, lower echelon with positive pivots and reduced entries left of each pivot.
    pub h: ZMat,
    /// Unimodular transform.
    pub u: ZMat,
    /// Number of non-zero columns of `h` (the leading ones).
    pub rank: usize,
    /// Row index of the pivot of each of the first `rank` columns.
    pub pivots: Vec<usize>,
}

/// Computes `H = A U` in column Hermite normal form with `U` unimodular.
///
/// Non-zero columns come first; the pivot of column `k` sits in row
/// `pivots[k]`, strictly increasing in `k`; entries of a pivot row to the
/// left of its pivot lie in `[0, pivot)`.
pub fn hermite_normal_form(a: &ZMat) -> Hnf {
    let (m, n) = (a.rows(), a.cols());
    let mut h = a.clone();
    let mut u = ZMat::identity(n);
    let mut k = 0;
    let mut pivots = Vec::new();
    for i in 0..m {
        if k == n {
            break;
        }
        for j in k + 1..n {
            if h.get(i, j).is_zero() {
                continue;
            }
            let a_ik = h.get(i, k).clone();
            let a_ij = h.get(i, j).clone();
            let e = a_ik.extended_gcd(&a_ij);
            let (mut g, mut s, mut t) = (e.gcd, e.x, e.y);
            if g.is_negative() {
                g = -g;
                s = -s;
                t = -t;
            }
            let p = &a_ik / &g;
            let q = &a_ij / &g;
            combine_cols(&mut h, k, j, &s, &t, &q, &p);
            combine_cols(&mut u, k, j, &s, &t, &q, &p);
        }
        if h.get(i, k).is_zero() {
            continue;
        }
        if h.get(i, k).is_negative() {
            negate_col(&mut h, k);
            negate_col(&mut u, k);
        }
        let pivot = h.get(i, k).clone();
        for j in 0..k {
            let q = h.get(i, j).div_floor(&pivot);
            if !q.is_zero() {
                sub_col_multiple(&mut h, j, k, &q);
                sub_col_multiple(&mut u, j, k, &q);
            }
        }
        pivots.push(i);
        k += 1;
    }
    Hnf { h, u, rank: k, pivots }
}

/// `(c_k, c_j) <- (s c_k + t c_j, -q c_k + p c_j)`; unimodular when `s p + t q = 1`.
fn combine_cols(m: &mut ZMat, k: usize, j: usize, s: &BigInt, t: &BigInt, q: &BigInt, p: &BigInt) {
    for i in 0..m.rows() {
        let ck = m.get(i, k).clone();
        let cj = m.get(i, j).clone();
        m.set(i, k, s * &ck + t * &cj);
        m.set(i, j, p * &cj - q * &ck);
    }
}

fn negate_col(m: &mut ZMat, k: usize) {
    for i in 0..m.rows() {
        let v = -m.get(i, k).clone();
        m.set(i, k, v);
    }
}

/// `c_j <- c_j - q c_k`.
fn sub_col_multiple(m: &mut ZMat, j: usize, k: usize, q: &BigInt) {
    for i in 0..m.rows() {
        let v = m.get(i, j) - q * m.get(i, k);
        m.set(i, j, v);
    }
}

/// True when `u` is an integer matrix with determinant `+-1`.
pub fn is_unimodular(u: &ZMat) -> bool {
    u.rows() == u.cols() && u.det().abs().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlat::mat::Mat;

    fn z(rows: Vec<Vec<i64>>) -> ZMat {
        Mat::from_rows(&rows).unwrap().map(|&x| BigInt::from(x))
    }

    #[test]
    fn identity_is_fixed() {
        let a = z(vec![vec![1, 0], vec![0, 1]]);
        let r = hermite_normal_form(&a);
        assert_eq!(r.h, a);
        assert_eq!(r.u, a);
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn row_vector_reduces_to_gcd() {
        let r = hermite_normal_form(&z(vec![vec![2, 4]]));
        assert_eq!(r.h, z(vec![vec![2, 0]]));
        assert_eq!(z(vec![vec![2, 4]]).mul(&r.u), r.h);
        assert!(is_unimodular(&r.u));
    }

    #[test]
    fn determinant_is_preserved() {
        let a = z(vec![vec![4, 0], vec![1, 2]]);
        let r = hermite_normal_form(&a);
        assert_eq!(r.h.det().abs(), BigInt::from(8));
        assert_eq!(a.mul(&r.u), r.h);
    }

    #[test]
    fn rank_deficient_columns_move_right() {
        let a = z(vec![vec![2, 4, 6], vec![1, 2, 3]]);
        let r = hermite_normal_form(&a);
        assert_eq!(r.rank, 1);
        assert_eq!(r.h.col(0), vec![BigInt::from(2), BigInt::from(1)]);
        assert!(r.h.col(1).iter().chain(r.h.col(2).iter()).all(|x| x.is_zero()));
    }
}
