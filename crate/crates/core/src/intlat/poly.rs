use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::mat::{IntMatrix, QMat, ZMat};
use crate::config::EXPANSIVE_MARGIN;
use crate::error::{Error, Result};

/// Integer polynomial, coefficients from degree 0 upwards.
pub type Poly = Vec<BigInt>;

/// Characteristic polynomial `det(xI - A)` by Faddeev-LeVerrier (exact division).
pub fn char_poly(a: &IntMatrix) -> Poly {
    let n = a.dim();
    let az = a.to_z();
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::one();
    let mut m = ZMat::zeros(n, n);
    for k in 1..=n {
        let shift = ZMat::identity(n).scale(&c[n - k + 1]);
        m = az.mul(&m).add(&shift);
        let am = az.mul(&m);
        let trace: BigInt = (0..n).map(|i| am.get(i, i).clone()).sum();
        c[n - k] = -trace / BigInt::from(k);
    }
    c
}

pub fn eval(p: &Poly, x: &BigInt) -> BigInt {
    p.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

/// Complex roots of a monic integer polynomial, from its companion matrix.
pub fn roots(p: &Poly) -> Vec<num_complex::Complex64> {
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = p[n].to_f64().unwrap_or(1.0);
    let comp = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i + 1 == j {
            1.0
        } else if i == n - 1 {
            -p[j].to_f64().unwrap_or(f64::NAN) / lead
        } else {
            0.0
        }
    });
    comp.complex_eigenvalues().iter().copied().collect()
}

/// True iff every eigenvalue of `R` has modulus above 1.
///
/// Exact shortcuts settle unit eigenvalues `+-1` and `|det R| <= 1`; other
/// moduli within the margin of 1 raise `AmbiguousSpectrum`.
pub fn is_expansive(r: &IntMatrix) -> Result<bool> {
    let p = char_poly(r);
    if eval(&p, &BigInt::one()).is_zero() || eval(&p, &-BigInt::one()).is_zero() {
        return Ok(false);
    }
    if r.det().abs() <= BigInt::one() {
        return Ok(false);
    }
    let moduli: Vec<f64> = roots(&p).iter().map(|z| z.norm()).collect();
    if moduli.iter().any(|&m| m < 1.0 - EXPANSIVE_MARGIN) {
        return Ok(false);
    }
    if let Some(&m) = moduli.iter().find(|&&m| (m - 1.0).abs() <= EXPANSIVE_MARGIN) {
        return Err(Error::AmbiguousSpectrum { modulus: m, margin: EXPANSIVE_MARGIN });
    }
    Ok(true)
}

/// Irreducible factors over `Q` of a monic integer polynomial of degree at most 3,
/// with multiplicity, linear factors first.
pub fn rational_factors(p: &Poly) -> Result<Vec<Poly>> {
    let deg = p.len() - 1;
    if deg > 3 {
        return Err(Error::DimensionUnsupported(deg));
    }
    let mut rest = p.clone();
    let mut factors = Vec::new();
    while rest.len() > 2 {
        match integer_root(&rest) {
            Some(r) => {
                factors.push(vec![-r.clone(), BigInt::one()]);
                rest = divide_linear(&rest, &r);
            }
            None => break,
        }
    }
    if rest.len() > 1 {
        factors.push(rest);
    }
    Ok(factors)
}

/// An integer root of a monic polynomial (rational roots of monic integer polynomials are integers).
fn integer_root(p: &Poly) -> Option<BigInt> {
    if p[0].is_zero() {
        return Some(BigInt::zero());
    }
    let c = p[0].abs();
    let limit = c.sqrt();
    let mut d = BigInt::one();
    while d <= limit {
        if (&c % &d).is_zero() {
            for cand in [d.clone(), &c / &d] {
                for s in [cand.clone(), -cand] {
                    if eval(p, &s).is_zero() {
                        return Some(s);
                    }
                }
            }
        }
        d += 1;
    }
    None
}

/// Synthetic division by `x - r`.
fn divide_linear(p: &Poly, r: &BigInt) -> Poly {
    let n = p.len() - 1;
    let mut q = vec![BigInt::zero(); n];
    let mut carry = BigInt::zero();
    for k in (1..=n).rev() {
        carry = &p[k] + carry * r;
        q[k - 1] = carry.clone();
    }
    q
}

pub fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `p(A)` as an exact rational matrix.
pub fn eval_matrix(p: &Poly, a: &QMat) -> QMat {
    let n = a.rows();
    p.iter().rev().fold(QMat::zeros(n, n), |acc, c| {
        acc.mul(a).add(&QMat::identity(n).scale(&BigRational::from_integer(c.clone())))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Poly {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn char_poly_of_triangular() {
        let r = IntMatrix::new(vec![vec![4, 0], vec![1, 2]]).unwrap();
        assert_eq!(char_poly(&r), big(&[8, -6, 1]));
    }

    #[test]
    fn char_poly_3x3() {
        let r = IntMatrix::new(vec![vec![2, 1, 0], vec![0, 3, 1], vec![1, 0, 4]]).unwrap();
        let p = char_poly(&r);
        // det(xI - A) at x = 0 is -det(A) for odd dimension.
        assert_eq!(p[0], -r.det());
        assert_eq!(p[2], BigInt::from(-9));
    }

    #[test]
    fn expansiveness() {
        assert!(is_expansive(&IntMatrix::scalar(2)).unwrap());
        assert!(is_expansive(&IntMatrix::new(vec![vec![4, 0], vec![1, 2]]).unwrap()).unwrap());
        assert!(!is_expansive(&IntMatrix::scalar(1)).unwrap());
        assert!(!is_expansive(&IntMatrix::scalar(-1)).unwrap());
        assert!(!is_expansive(&IntMatrix::new(vec![vec![2, 0], vec![0, 1]]).unwrap()).unwrap());
        assert!(!is_expansive(&IntMatrix::new(vec![vec![1, 1], vec![1, 2]]).unwrap()).unwrap());
        assert!(is_expansive(&IntMatrix::new(vec![vec![1, -2], vec![2, 1]]).unwrap()).unwrap());
    }

    #[test]
    fn rotation_with_unit_modulus_is_not_expansive() {
        // x^2 + 1 has roots of modulus exactly 1 but no rational root.
        let r = IntMatrix::new(vec![vec![0, -1], vec![1, 0]]).unwrap();
        assert!(!is_expansive(&r).unwrap());
    }

    #[test]
    fn factorization() {
        assert_eq!(rational_factors(&big(&[8, -6, 1])).unwrap().len(), 2);
        assert_eq!(rational_factors(&big(&[-3, 0, 1])).unwrap(), vec![big(&[-3, 0, 1])]);
        let f = rational_factors(&big(&[-6, 11, -6, 1])).unwrap();
        assert_eq!(f.len(), 3);
        assert!(rational_factors(&big(&[1, 0, 0, 0, 1])).is_err());
    }
}
