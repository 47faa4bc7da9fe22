//! Exact vanishing test for sums of roots of unity.
//!
//! A minimal vanishing sum of `n` roots of unity is, after rotation, a sum of
//! roots whose orders divide the product `M` of the primes `<= n` (Mann).
//! So a sum vanishes iff every class of terms whose phases differ by
//! elements of `(1/M) Z` vanishes on its own, and each class is a sum in
//! `Z[zeta_M] = Z[zeta_p1] (x) ... (x) Z[zeta_pk]`, tested by reducing every
//! tensor axis with `1 + zeta_p + ... + zeta_p^{p-1} = 0`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::intlat::IVec;

/// Largest number of terms handled exactly.
pub const EXACT_TERMS: usize = 16;

fn primes_up_to(n: usize) -> Vec<u64> {
    (2..=n as u64).filter(|&p| (2..p).take_while(|q| q * q <= p).all(|q| p % q != 0)).collect()
}

/// Fractional part in `[0, 1)` of an exact rational.
pub fn frac(t: &BigRational) -> BigRational {
    BigRational::new(t.numer().mod_floor(t.denom()), t.denom().clone())
}

/// Whether `sum_j exp(2 pi i theta_j)` is exactly zero; `None` beyond [`EXACT_TERMS`] terms.
pub fn vanishes(phases: &[BigRational]) -> Option<bool> {
    let n = phases.len();
    if n > EXACT_TERMS {
        return None;
    }
    if n < 2 {
        return Some(false);
    }
    let primes = primes_up_to(n);
    let m: u64 = primes.iter().product();
    let mq = BigRational::from_integer(BigInt::from(m));
    let fr: Vec<BigRational> = phases.iter().map(frac).collect();
    let mut assigned = vec![false; n];
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let mut class = Vec::new();
        for j in i..n {
            if assigned[j] {
                continue;
            }
            let diff = (&fr[j] - &fr[i]) * &mq;
            if diff.is_integer() {
                assigned[j] = true;
                let c = diff.to_integer().mod_floor(&BigInt::from(m)).to_u64().expect("residue below m");
                class.push(c);
            }
        }
        if !class_vanishes(&class, &primes, m) {
            return Some(false);
        }
    }
    Some(true)
}

/// `sum_c zeta_M^c == 0` for exponents `c` in `[0, M)`.
fn class_vanishes(exps: &[u64], primes: &[u64], m: u64) -> bool {
    if exps.len() < 2 {
        return false;
    }
    // zeta_M = prod_p zeta_p^{u_p} with u_p = (M/p)^{-1} mod p.
    let units: Vec<u64> = primes
        .iter()
        .map(|&p| {
            let q = (m / p) % p;
            (1..p).find(|u| (q * u) % p == 1).expect("p prime")
        })
        .collect();
    let size = m as usize;
    let mut coeff = vec![0i64; size];
    for &c in exps {
        let mut idx = 0usize;
        for (&p, &u) in primes.iter().zip(&units) {
            idx = idx * p as usize + ((c % p) * u % p) as usize;
        }
        coeff[idx] += 1;
    }
    // Axis k has stride equal to the product of the later primes.
    let mut stride = size;
    for &p in primes {
        let p = p as usize;
        stride /= p;
        let block = stride * p;
        for base in (0..size).step_by(block) {
            for off in 0..stride {
                let top = base + (p - 1) * stride + off;
                let v = coeff[top];
                if v != 0 {
                    coeff[top] = 0;
                    for a in 0..p - 1 {
                        coeff[base + a * stride + off] -= v;
                    }
                }
            }
        }
    }
    coeff.iter().all(|&x| x == 0)
}

/// Exact test of `M_B(y) = 0` at a rational point.
pub fn mask_vanishes(digits: &[IVec], y: &[BigRational]) -> Option<bool> {
    let phases: Vec<BigRational> = digits
        .iter()
        .map(|b| b.iter().zip(y).fold(BigRational::zero(), |acc, (&bi, yi)| acc + yi * BigInt::from(bi)))
        .collect();
    vanishes(&phases)
}
