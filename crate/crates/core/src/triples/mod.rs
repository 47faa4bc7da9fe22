//! Affine pairs, Hadamard triples, masks and triple towers.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{HADAMARD_DEFECT_TOL, TOWER_CAP};
use crate::error::{Error, Result};
use crate::intlat::{is_expansive, IVec, IntMatrix, ResidueSystem};

/// Expansive integer matrix `R` with a digit set `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePair {
    r: IntMatrix,
    #[serde(rename = "b")]
    digits: Vec<IVec>,
}

impl AffinePair {
    /// Checks dimensions, distinctness of digits and expansiveness of `R`.
    pub fn new(r: IntMatrix, digits: Vec<IVec>) -> Result<Self> {
        let pair = Self::checked_shape(r, digits)?;
        if !is_expansive(&pair.r)? {
            return Err(Error::NotExpansive);
        }
        Ok(pair)
    }

    fn checked_shape(r: IntMatrix, digits: Vec<IVec>) -> Result<Self> {
        let d = r.dim();
        if digits.is_empty() {
            return Err(Error::InvalidInput("digit set is empty".into()));
        }
        if let Some(b) = digits.iter().find(|b| b.len() != d) {
            return Err(Error::DimensionMismatch(format!("digit {b:?} in a {d}-dimensional pair")));
        }
        let mut seen = HashSet::new();
        for b in &digits {
            if !seen.insert(b) {
                return Err(Error::InvalidInput(format!("repeated digit {b:?}")));
            }
        }
        Ok(Self { r, digits })
    }

    /// For matrices already known to be expansive, e.g. powers of one.
    pub(crate) fn from_parts(r: IntMatrix, digits: Vec<IVec>) -> Result<Self> {
        Self::checked_shape(r, digits)
    }

    pub fn r(&self) -> &IntMatrix {
        &self.r
    }

    pub fn digits(&self) -> &[IVec] {
        &self.digits
    }

    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    /// Number of digits `N`.
    pub fn n(&self) -> usize {
        self.digits.len()
    }

    pub fn is_simple(&self) -> Result<bool> {
        Ok(ResidueSystem::new(&self.r)?.collision(&self.digits).is_none())
    }

    /// `max_b ||b||_1`, the Lipschitz scale of the mask.
    pub fn max_digit_l1(&self) -> f64 {
        self.digits.iter().map(|b| b.iter().map(|x| x.unsigned_abs() as f64).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn mask(&self, xi: &[f64]) -> Complex64 {
        mask_eval(self, xi)
    }
}

/// `M_B(xi) = (1/N) sum_b exp(-2 pi i <b, xi>)`.
pub fn mask_eval(pair: &AffinePair, xi: &[f64]) -> Complex64 {
    mask_of(&pair.digits, xi)
}

pub(crate) fn mask_of(digits: &[IVec], xi: &[f64]) -> Complex64 {
    let mut acc = Complex64::zero();
    for b in digits {
        let t: f64 = b.iter().zip(xi).map(|(&bi, &x)| bi as f64 * x).sum();
        acc += Complex64::cis(-2.0 * PI * t.rem_euclid(1.0));
    }
    acc / digits.len() as f64
}

/// `u_B(x) = |M_B(x)|^2`.
pub fn u_eval(pair: &AffinePair, x: &[f64]) -> f64 {
    mask_eval(pair, x).norm_sqr().min(1.0)
}

/// Exact fractional parts of `<A^{-1} b, l>` for a non-singular integer matrix `A`.
#[derive(Debug, Clone)]
pub struct InversePhase {
    adj: Vec<Vec<BigInt>>,
    det: BigInt,
    small: Option<(Vec<Vec<i128>>, i128)>,
}

impl InversePhase {
    pub fn new(a: &IntMatrix) -> Result<Self> {
        let det = a.det();
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let inv = a.inverse()?;
        let d = a.dim();
        let adj: Vec<Vec<BigInt>> = (0..d)
            .map(|i| (0..d).map(|j| (inv.get(i, j) * num_rational::BigRational::from_integer(det.clone())).to_integer()).collect())
            .collect();
        let small = det.to_i128().and_then(|dd| {
            let rows: Option<Vec<Vec<i128>>> = adj.iter().map(|r| r.iter().map(|x| x.to_i128()).collect()).collect();
            rows.map(|r| (r, dd))
        });
        Ok(Self { adj, det, small })
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    /// Fractional part of `<A^{-1} b, l>` in `[0, 1)`.
    pub fn frac(&self, b: &[i64], l: &[i64]) -> f64 {
        if let Some((adj, det)) = &self.small {
            if let Some(v) = Self::small_dot(adj, b, l) {
                let m = det.abs();
                let num = if *det < 0 { (-v).rem_euclid(m) } else { v.rem_euclid(m) };
                return num as f64 / m as f64;
            }
        }
        let mut v = BigInt::zero();
        for (i, &li) in l.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                v += &self.adj[i][j] * BigInt::from(li) * BigInt::from(bj);
            }
        }
        let m = self.det.abs();
        let num = if self.det.is_negative() { (-v).mod_floor(&m) } else { v.mod_floor(&m) };
        crate::intlat::mat::ratio_to_f64(&num_rational::BigRational::new(num, m))
    }

    fn small_dot(adj: &[Vec<i128>], b: &[i64], l: &[i64]) -> Option<i128> {
        let mut v: i128 = 0;
        for (i, &li) in l.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                let t = adj[i][j].checked_mul(li as i128)?.checked_mul(bj as i128)?;
                v = v.checked_add(t)?;
            }
        }
        Some(v)
    }
}

/// `H = (1/sqrt N) [exp(2 pi i <R^{-1} b, l>)]`, rows indexed by `L`, columns by `B`.
pub fn hadamard_matrix(r: &IntMatrix, b: &[IVec], l: &[IVec]) -> Result<Vec<Vec<Complex64>>> {
    let phase = InversePhase::new(r)?;
    let s = 1.0 / (b.len() as f64).sqrt();
    Ok(l.par_iter().map(|li| b.iter().map(|bj| Complex64::cis(2.0 * PI * phase.frac(bj, li)) * s).collect()).collect())
}

/// Max-norm of `H* H - I`.
pub fn unitarity_defect(h: &[Vec<Complex64>]) -> f64 {
    let n = h.first().map_or(0, |r| r.len());
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut worst = 0.0f64;
            for j in 0..n {
                let mut acc = Complex64::zero();
                for row in h {
                    acc += row[i].conj() * row[j];
                }
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Returns whether `(R, B, L)` is a Hadamard triple, and the unitarity defect.
pub fn validate_triple(r: &IntMatrix, b: &[IVec], l: &[IVec]) -> Result<(bool, f64)> {
    if b.len() != l.len() {
        return Err(Error::SizeMismatch { left: b.len(), right: l.len() });
    }
    let d = r.dim();
    if b.iter().chain(l).any(|v| v.len() != d) {
        return Err(Error::DimensionMismatch(format!("digits must have length {d}")));
    }
    let defect = unitarity_defect(&hadamard_matrix(r, b, l)?);
    Ok((defect <= HADAMARD_DEFECT_TOL, defect))
}

/// A validated Hadamard triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardTriple {
    pub pair: AffinePair,
    pub l: Vec<IVec>,
    pub defect: f64,
}

impl HadamardTriple {
    pub fn new(pair: AffinePair, l: Vec<IVec>) -> Result<Self> {
        let (ok, defect) = validate_triple(pair.r(), pair.digits(), &l)?;
        if !ok {
            return Err(Error::NotHadamard { defect });
        }
        Ok(Self { pair, l, defect })
    }

    pub fn from_rows(r: Vec<Vec<i64>>, b: Vec<IVec>, l: Vec<IVec>) -> Result<Self> {
        Self::new(AffinePair::new(IntMatrix::new(r)?, b)?, l)
    }

    pub fn r(&self) -> &IntMatrix {
        self.pair.r()
    }

    pub fn b(&self) -> &[IVec] {
        self.pair.digits()
    }

    pub fn n(&self) -> usize {
        self.pair.n()
    }

    pub fn dim(&self) -> usize {
        self.pair.dim()
    }

    pub fn matrix(&self) -> Vec<Vec<Complex64>> {
        hadamard_matrix(self.r(), self.b(), &self.l).expect("validated triple has non-singular R")
    }

    /// `B` is simple for `R` and `L` is simple for `R^T`.
    pub fn residues_distinct(&self) -> Result<bool> {
        let rb = ResidueSystem::new(self.r())?;
        let rl = ResidueSystem::new(&self.r().transpose())?;
        Ok(rb.collision(self.b()).is_none() && rl.collision(&self.l).is_none())
    }
}

/// `B_n = B + R B + ... + R^{n-1} B`; index `sum_j i_j N^j` holds `sum_j R^j b_{i_j}`.
pub fn digit_tower(r: &IntMatrix, digits: &[IVec], n: usize) -> Result<Vec<IVec>> {
    let count = (digits.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > TOWER_CAP {
        return Err(Error::CapExceeded { what: "digit tower", requested: count, cap: TOWER_CAP });
    }
    let d = r.dim();
    let mut out: Vec<IVec> = vec![vec![0; d]];
    let mut power = IntMatrix::identity(d);
    for level in 0..n {
        let scaled: Vec<IVec> = digits.iter().map(|b| power.mul_vec(b)).collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(out.len() * digits.len());
        for s in &scaled {
            for v in &out {
                next.push(crate::intlat::mat::add_vec(v, s)?);
            }
        }
        out = next;
        if level + 1 < n {
            power = r.mul(&power)?;
        }
    }
    Ok(out)
}

/// `(R^k, B_k, L_k^T)`, re-validated.
pub fn tower(triple: &HadamardTriple, k: usize) -> Result<HadamardTriple> {
    if k == 0 {
        return Err(Error::InvalidInput("tower level must be at least 1".into()));
    }
    let count = (triple.n() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if count > TOWER_CAP {
        return Err(Error::CapExceeded { what: "triple tower", requested: count, cap: TOWER_CAP });
    }
    let rk = triple.r().pow(k as u32)?;
    let bk = digit_tower(triple.r(), triple.b(), k)?;
    let lk = digit_tower(&triple.r().transpose(), &triple.l, k)?;
    HadamardTriple::new(AffinePair::from_parts(rk, bk)?, lk)
}

/// Max over `x` of `|sum_{l in L} u_B((R^T)^{-1}(x + l)) - 1|`.
pub fn transfer_partition_check(triple: &HadamardTriple, grid: &[Vec<f64>]) -> f64 {
    let inv_t = triple.r().transpose().inverse().expect("expansive matrix").to_f64();
    grid.par_iter()
        .map(|x| {
            let total: f64 = triple
                .l
                .iter()
                .map(|l| {
                    let y: Vec<f64> = x.iter().zip(l).map(|(&a, &b)| a + b as f64).collect();
                    u_eval(&triple.pair, &inv_t.apply(&y))
                })
                .sum();
            (total - 1.0).abs()
        })
        .reduce(|| 0.0, f64::max)
}

/// Regular grid on `[0,1]^d` with `per_axis` points per axis, endpoints included.
pub fn unit_grid(d: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let step = if per_axis > 1 { 1.0 / (per_axis - 1) as f64 } else { 0.0 };
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out.into_iter().flat_map(|p: Vec<f64>| (0..per_axis).map(move |i| [p.clone(), vec![i as f64 * step]].concat())).collect();
    }
    out
}

/// `J_n + (R^T)^n k` for per-element shifts `k`; inputs must be distinct mod `(R^T)^n Z^d`.
pub fn lift_digits(j: &[IVec], r: &IntMatrix, n: usize, shifts: &[IVec]) -> Result<Vec<IVec>> {
    if shifts.len() != j.len() {
        return Err(Error::DimensionMismatch(format!("{} shifts for {} digits", shifts.len(), j.len())));
    }
    let rt_n = r.transpose().pow(n as u32)?;
    if let Some((a, b)) = ResidueSystem::new(&rt_n)?.collision(j) {
        return Err(Error::ResidueCollision(a, b));
    }
    j.iter().zip(shifts).map(|(v, k)| crate::intlat::mat::add_vec(v, &rt_n.mul_vec(k)?)).collect()
}

/// Exhaustive search for a dual digit set in dimension one, over subsets of `{0, .., |R|-1}` containing 0.
///
/// Only for small `N`; returns the first valid set in lexicographic order.
pub fn search_dual_1d(r: i64, digits: &[i64]) -> Result<Option<Vec<i64>>> {
    let n = digits.len();
    if n > 4 {
        return Err(Error::Unsupported("dual digit search is limited to N <= 4".into()));
    }
    let m = r.unsigned_abs() as i64;
    let rm = IntMatrix::scalar(r);
    let b: Vec<IVec> = digits.iter().map(|&x| vec![x]).collect();
    let mut found = None;
    let mut chosen = vec![0i64];
    search_subsets(&mut chosen, 1, m, n, &mut |l| {
        let lv: Vec<IVec> = l.iter().map(|&x| vec![x]).collect();
        matches!(validate_triple(&rm, &b, &lv), Ok((true, _)))
    }, &mut found);
    Ok(found)
}

fn search_subsets(
    chosen: &mut Vec<i64>,
    start: i64,
    m: i64,
    n: usize,
    accept: &mut dyn FnMut(&[i64]) -> bool,
    found: &mut Option<Vec<i64>>,
) {
    if found.is_some() {
        return;
    }
    if chosen.len() == n {
        if accept(chosen) {
            *found = Some(chosen.clone());
        }
        return;
    }
    for x in start..m {
        chosen.push(x);
        search_subsets(chosen, x + 1, m, n, accept, found);
        chosen.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn mask_values() {
        let jp = catalog::quarter_cantor().pair;
        assert!(mask_eval(&jp, &[0.25]).norm() < 1e-15);
        assert!(close(mask_eval(&jp, &[0.0]).re, 1.0, 1e-15));
        let tri = catalog::triangular().pair;
        for y in [-1.3, 0.0, 0.2, 0.77] {
            assert!(mask_eval(&tri, &[0.5, y]).norm() < 1e-14);
        }
    }

    #[test]
    fn mask_matches_factored_form() {
        let tri = catalog::triangular().pair;
        for (x, y) in [(0.1, 0.2), (0.37, -0.8), (1.25, 0.4)] {
            let f = (Complex64::new(1.0, 0.0) + Complex64::cis(-2.0 * PI * x))
                * (Complex64::new(1.0, 0.0) + Complex64::cis(-2.0 * PI * 3.0 * y))
                / 4.0;
            assert!((mask_eval(&tri, &[x, y]) - f).norm() < 1e-14);
        }
    }

    #[test]
    fn transfer_weights() {
        let jp = catalog::quarter_cantor().pair;
        assert!(close(u_eval(&jp, &[0.0]), 1.0, 1e-15));
        assert!(u_eval(&jp, &[0.25]) < 1e-30);
        assert!(close(u_eval(&jp, &[0.125]), 0.5, 1e-15));
    }

    #[test]
    fn triples_validate() {
        let jp = catalog::quarter_cantor();
        assert!(jp.defect < 1e-12);
        let tri = catalog::triangular();
        assert!(tri.defect < 1e-12);
        assert!(jp.residues_distinct().unwrap() && tri.residues_distinct().unwrap());
    }

    #[test]
    fn no_dual_for_three_and_zero_two() {
        let r = IntMatrix::scalar(3);
        let b = vec![vec![0], vec![2]];
        for l1 in 0..3 {
            for l2 in 0..3 {
                let (ok, _) = validate_triple(&r, &b, &[vec![l1], vec![l2]]).unwrap();
                assert!(!ok);
            }
        }
        assert_eq!(search_dual_1d(3, &[0, 2]).unwrap(), None);
        assert_eq!(search_dual_1d(4, &[0, 2]).unwrap(), Some(vec![0, 1]));
    }

    #[test]
    fn size_mismatch() {
        let r = IntMatrix::scalar(4);
        assert_eq!(validate_triple(&r, &[vec![0], vec![2]], &[vec![0]]), Err(Error::SizeMismatch { left: 2, right: 1 }));
    }

    #[test]
    fn towers() {
        let jp = catalog::quarter_cantor();
        let t2 = tower(&jp, 2).unwrap();
        assert_eq!(t2.b(), &[vec![0], vec![2], vec![8], vec![10]]);
        assert_eq!(t2.l, vec![vec![0], vec![1], vec![4], vec![5]]);
        assert_eq!(tower(&jp, 1).unwrap(), jp);
        let t = tower(&catalog::triangular(), 2).unwrap();
        assert_eq!(t.n(), 16);
        for k in 1..=4 {
            assert!(tower(&catalog::triangular(), k).unwrap().defect < 1e-10);
            assert!(tower(&jp, k).unwrap().defect < 1e-10);
        }
    }

    #[test]
    fn partition_of_unity() {
        let jp = catalog::quarter_cantor();
        assert!(transfer_partition_check(&jp, &unit_grid(1, 101)) < 1e-12);
        assert!(transfer_partition_check(&jp, &[vec![0.0]]) < 1e-15);
        assert!(transfer_partition_check(&catalog::triangular(), &unit_grid(2, 33)) < 1e-10);
    }

    #[test]
    fn lifting() {
        let r = IntMatrix::scalar(4);
        let j = vec![vec![0], vec![1]];
        assert_eq!(lift_digits(&j, &r, 1, &[vec![0], vec![0]]).unwrap(), j);
        let lifted = lift_digits(&j, &r, 1, &[vec![0], vec![7]]).unwrap();
        assert_eq!(lifted, vec![vec![0], vec![29]]);
        assert!(validate_triple(&r, &[vec![0], vec![2]], &lifted).unwrap().0);
        assert_eq!(
            lift_digits(&[vec![0], vec![4]], &r, 1, &[vec![0], vec![0]]),
            Err(Error::ResidueCollision(vec![0], vec![4]))
        );
    }

    #[test]
    fn exact_phase_handles_negative_determinant() {
        let p = InversePhase::new(&IntMatrix::scalar(-3)).unwrap();
        assert!(close(p.frac(&[1], &[1]), 2.0 / 3.0, 1e-15));
    }

    #[test]
    fn pair_rejects_bad_input() {
        assert!(AffinePair::new(IntMatrix::scalar(1), vec![vec![0]]).is_err());
        assert!(AffinePair::new(IntMatrix::scalar(2), vec![vec![0], vec![0]]).is_err());
        assert!(AffinePair::new(IntMatrix::scalar(2), vec![]).is_err());
    }
}
