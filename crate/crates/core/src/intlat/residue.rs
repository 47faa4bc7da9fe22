use std::collections::HashMap;

use num_traits::ToPrimitive;

use super::hnf::hermite_normal_form;
use super::mat::{IVec, IntMatrix};
use crate::error::{Error, Result};

/// Canonical residues modulo `A(Z^d)` for a non-singular integer matrix `A`.
///
/// The canonical representative of `v` is the unique `w = v - A k` with
/// `0 <= w_i < h_ii`, where `h` is the lower-triangular column HNF of `A`.
#[derive(Debug, Clone)]
pub struct ResidueSystem {
    h: Vec<Vec<i128>>,
}

impl ResidueSystem {
    pub fn new(a: &IntMatrix) -> Result<Self> {
        let hnf = hermite_normal_form(&a.to_z());
        if hnf.rank != a.dim() {
            return Err(Error::Singular);
        }
        let d = a.dim();
        let mut h = vec![vec![0i128; d]; d];
        for (i, row) in h.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = hnf.h.get(i, j).to_i128().ok_or(Error::Overflow("residue system"))?;
            }
        }
        if h.iter().flatten().any(|x| x.abs() > i64::MAX as i128) {
            return Err(Error::Overflow("residue system"));
        }
        Ok(Self { h })
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    /// Number of residue classes, `|det A|`.
    pub fn index(&self) -> u128 {
        (0..self.dim()).map(|i| self.h[i][i] as u128).product()
    }

    /// Diagonal of the HNF; the canonical box is `prod [0, h_ii)`.
    pub fn diagonal(&self) -> Vec<i64> {
        (0..self.dim()).map(|i| self.h[i][i] as i64).collect()
    }

    pub fn canonical(&self, v: &[i64]) -> IVec {
        let d = self.dim();
        let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for i in 0..d {
            let q = w[i].div_euclid(self.h[i][i]);
            if q != 0 {
                for (r, wr) in w.iter_mut().enumerate().skip(i) {
                    *wr -= q * self.h[r][i];
                }
            }
        }
        w.into_iter().map(|x| x as i64).collect()
    }

    pub fn congruent(&self, a: &[i64], b: &[i64]) -> bool {
        self.canonical(a) == self.canonical(b)
    }

    /// First pair of congruent entries, if any.
    pub fn collision(&self, digits: &[IVec]) -> Option<(IVec, IVec)> {
        let mut seen: HashMap<IVec, usize> = HashMap::new();
        for (i, b) in digits.iter().enumerate() {
            if let Some(&j) = seen.get(&self.canonical(b)) {
                return Some((digits[j].clone(), b.clone()));
            }
            seen.insert(self.canonical(b), i);
        }
        None
    }

    /// The canonical representatives of all classes, in lexicographic order.
    pub fn representatives(&self, cap: u128) -> Result<Vec<IVec>> {
        let count = self.index();
        if count > cap {
            return Err(Error::CapExceeded { what: "complete residue system", requested: count, cap });
        }
        let diag = self.diagonal();
        let mut out = Vec::with_capacity(count as usize);
        let mut cur = vec![0i64; diag.len()];
        loop {
            out.push(cur.clone());
            let mut i = diag.len();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < diag[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
    }
}

/// Residues of `B` modulo `R(Z^d)` are pairwise distinct.
pub fn is_simple_digit_set(r: &IntMatrix, digits: &[IVec]) -> Result<bool> {
    Ok(ResidueSystem::new(r)?.collision(digits).is_none())
}

/// Canonical representatives of `Z^d / R(Z^d)`.
pub fn complete_representatives(r: &IntMatrix) -> Result<Vec<IVec>> {
    ResidueSystem::new(r)?.representatives(crate::config::TOWER_CAP)
}
