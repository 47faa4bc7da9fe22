//! Almost-Parseval frame levels: singular values of the fractal Fourier
//! matrices, subset selection and concatenated bounds.

mod build;
mod tsosc;

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DENSE_FRAME_CAP, FRAME_CAP, POWER_MAX_ITER, POWER_TOL, SELECT_BUDGET};
use crate::error::{Error, Result};
use crate::intlat::{IVec, IntMatrix, ResidueSystem};
use crate::measure::FourierEval;
use crate::triples::{digit_tower, AffinePair, InversePhase};

pub use build::{frame_spectrum_build, FrameSpectrum};
pub use tsosc::{tsosc_check, TsoscReport, TsoscVerdict};

/// Largest matrix (rows times columns) handled by the matrix-free path.
const MATRIX_FREE_ENTRIES: u128 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Pivoted Gram-Schmidt seeding followed by seeded swap descent.
    Greedy,
    /// All subsets, when there are few enough; otherwise falls back to `Greedy`.
    Exhaustive,
    /// The rows passed in by the caller.
    Given,
}

/// One frame level `J_n` and the extreme squared singular values of `F_n(B_n, J_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub n: usize,
    pub j: Vec<IVec>,
    pub sigma_min_sq: f64,
    pub sigma_max_sq: f64,
    pub ratio: f64,
    pub strategy: Strategy,
    pub seed: u64,
    /// Elements of `J_n` are pairwise distinct modulo `(R^T)^n Z^d`.
    pub residues_distinct: bool,
}

impl FrameReport {
    /// `max(1 - sigma_min^2, sigma_max^2 - 1)`.
    pub fn epsilon(&self) -> f64 {
        (1.0 - self.sigma_min_sq).max(self.sigma_max_sq - 1.0)
    }

    fn new(pair: &AffinePair, n: usize, j: Vec<IVec>, bounds: (f64, f64), strategy: Strategy, seed: u64) -> Result<Self> {
        let (lo, hi) = bounds;
        let rt_n = pair.r().transpose().pow(n as u32)?;
        let residues_distinct = ResidueSystem::new(&rt_n)?.collision(&j).is_none();
        Ok(Self { n, j, sigma_min_sq: lo, sigma_max_sq: hi, ratio: ratio(lo, hi), strategy, seed, residues_distinct })
    }
}

fn ratio(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 {
        (hi / lo).max(1.0)
    } else {
        f64::INFINITY
    }
}

/// `F_n = N^{-n/2} [exp(-2 pi i <R^{-n} b, l>)]`, rows `l in J`, columns `b in B_n`.
pub fn frame_matrix(pair: &AffinePair, n: usize, j: &[IVec]) -> Result<DMatrix<Complex64>> {
    let bn = digit_tower(pair.r(), pair.digits(), n)?;
    let phase = InversePhase::new(&pair.r().pow(n as u32)?)?;
    let s = 1.0 / (bn.len() as f64).sqrt();
    let rows: Vec<Vec<Complex64>> = j.par_iter().map(|l| bn.iter().map(|b| Complex64::cis(-2.0 * PI * phase.frac(b, l)) * s).collect()).collect();
    Ok(DMatrix::from_fn(j.len(), bn.len(), |r, c| rows[r][c]))
}

/// Extreme squared singular values of `F_n(B_n, J)`; `sigma_min^2 = 0` when `#J < N^n`.
pub fn frame_matrix_bounds(pair: &AffinePair, n: usize, j: &[IVec]) -> Result<(f64, f64)> {
    frame_matrix_bounds_with(pair, n, j, DENSE_FRAME_CAP)
}

/// As [`frame_matrix_bounds`], switching to power iteration above `dense_cap` columns.
pub fn frame_matrix_bounds_with(pair: &AffinePair, n: usize, j: &[IVec], dense_cap: usize) -> Result<(f64, f64)> {
    if j.is_empty() {
        return Err(Error::InvalidInput("empty row set".into()));
    }
    let cols = (pair.n() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if cols > FRAME_CAP {
        return Err(Error::CapExceeded { what: "frame columns", requested: cols, cap: FRAME_CAP });
    }
    if cols <= dense_cap as u128 && j.len() <= DENSE_FRAME_CAP {
        let f = frame_matrix(pair, n, j)?;
        let sv = f.singular_values();
        let hi = sv.iter().fold(0.0f64, |a, &s| a.max(s * s));
        let lo = if j.len() < cols as usize { 0.0 } else { sv.iter().fold(f64::INFINITY, |a, &s| a.min(s * s)) };
        return Ok((lo, hi));
    }
    let entries = cols * j.len() as u128;
    if entries > MATRIX_FREE_ENTRIES {
        return Err(Error::CapExceeded { what: "matrix-free frame entries", requested: entries, cap: MATRIX_FREE_ENTRIES });
    }
    matrix_free_bounds(pair, n, j)
}

/// Power iteration on `F* F` and on `s I - F* F`, with `F` applied on the fly.
fn matrix_free_bounds(pair: &AffinePair, n: usize, j: &[IVec]) -> Result<(f64, f64)> {
    let bn = digit_tower(pair.r(), pair.digits(), n)?;
    let inv = pair.r().pow(n as u32)?.inverse()?.to_f64();
    let y: Vec<Vec<f64>> = bn.iter().map(|b| inv.apply(&b.iter().map(|&x| x as f64).collect::<Vec<_>>())).collect();
    let ls: Vec<Vec<f64>> = j.iter().map(|l| l.iter().map(|&x| x as f64).collect()).collect();
    let s = 1.0 / (bn.len() as f64).sqrt();
    let phase = |row: &[f64], col: &[f64]| -> Complex64 { Complex64::cis(-2.0 * PI * row.iter().zip(col).map(|(a, b)| a * b).sum::<f64>()) * s };
    let gram = |w: &[Complex64]| -> Vec<Complex64> {
        let fw: Vec<Complex64> = ls.par_iter().map(|l| y.iter().zip(w).map(|(c, x)| phase(l, c) * x).sum()).collect();
        y.par_iter().map(|c| ls.iter().zip(&fw).map(|(l, v)| phase(l, c).conj() * v).sum()).collect()
    };
    let dim = bn.len();
    let hi = power(dim, |w| gram(w))?;
    if j.len() < dim {
        return Ok((0.0, hi));
    }
    let top = power(dim, |w| gram(w).iter().zip(w).map(|(g, x)| x * hi - g).collect())?;
    Ok(((hi - top).max(0.0), hi))
}

fn power(dim: usize, apply: impl Fn(&[Complex64]) -> Vec<Complex64>) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut w: Vec<Complex64> = (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut lam = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let nrm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return Ok(0.0);
        }
        w.iter_mut().for_each(|x| *x /= nrm);
        let v = apply(&w);
        let next: f64 = w.iter().zip(&v).map(|(a, b)| (a.conj() * b).re).sum();
        if (next - lam).abs() <= POWER_TOL * next.abs().max(1e-300) {
            return Ok(next);
        }
        lam = next;
        w = v;
    }
    Ok(lam)
}

/// `|det R|^n` canonical representatives modulo `(R^T)^n Z^d`.
pub fn full_dual_set(pair: &AffinePair, n: usize) -> Result<Vec<IVec>> {
    ResidueSystem::new(&pair.r().transpose().pow(n as u32)?)?.representatives(FRAME_CAP)
}

fn choose(n: u128, k: u128) -> u128 {
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

fn for_each_subset(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == m - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for t in i..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// Best ratio over every `N^n`-subset of the full dual set, if there are at most `limit` subsets.
pub fn exhaustive_subset(pair: &AffinePair, n: usize, limit: u128) -> Result<FrameReport> {
    let cands = full_dual_set(pair, n)?;
    let k = pair.n().pow(n as u32);
    let count = choose(cands.len() as u128, k as u128);
    if count > limit {
        return Err(Error::CapExceeded { what: "frame subsets", requested: count, cap: limit });
    }
    let f = frame_matrix(pair, n, &cands)?;
    let mut best: Option<(f64, Vec<usize>, (f64, f64))> = None;
    if k == 0 || cands.len() < k {
        return Err(Error::InvalidInput("not enough candidates".into()));
    }
    for_each_subset(cands.len(), k, |idx| {
        let b = sub_bounds(&f, idx);
        let r = ratio(b.0, b.1);
        if best.as_ref().map_or(true, |x| r < x.0) {
            best = Some((r, idx.to_vec(), b));
        }
    });
    let (_, idx, b) = best.expect("at least one subset");
    FrameReport::new(pair, n, idx.iter().map(|&i| cands[i].clone()).collect(), b, Strategy::Exhaustive, 0)
}

fn sub_bounds(f: &DMatrix<Complex64>, rows: &[usize]) -> (f64, f64) {
    let sub = f.select_rows(rows);
    let sv = sub.singular_values();
    let hi = sv.iter().fold(0.0f64, |a, &s| a.max(s * s));
    let lo = if rows.len() < f.ncols() { 0.0 } else { sv.iter().fold(f64::INFINITY, |a, &s| a.min(s * s)) };
    (lo, hi)
}

/// Selects `N^n` rows of the full dual set with a small condition number.
///
/// Deterministic for a given seed; reports measured bounds only.
pub fn select_subset(pair: &AffinePair, n: usize, strategy: Strategy, seed: u64) -> Result<FrameReport> {
    select_subset_with_budget(pair, n, strategy, seed, SELECT_BUDGET)
}

/// [`select_subset`] with `budget` swap attempts. For a fixed seed a larger
/// budget continues the same descent, so the ratio never gets worse.
pub fn select_subset_with_budget(pair: &AffinePair, n: usize, strategy: Strategy, seed: u64, budget: usize) -> Result<FrameReport> {
    let d = pair.dim();
    if n == 0 {
        return FrameReport::new(pair, 0, vec![vec![0; d]], (1.0, 1.0), strategy, seed);
    }
    if strategy == Strategy::Exhaustive {
        match exhaustive_subset(pair, n, SELECT_BUDGET as u128 * 10) {
            Ok(r) => return Ok(FrameReport { seed, ..r }),
            Err(Error::CapExceeded { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let cands = full_dual_set(pair, n)?;
    let k = pair.n().pow(n as u32);
    if cands.len() > DENSE_FRAME_CAP {
        return Err(Error::CapExceeded { what: "selection candidates", requested: cands.len() as u128, cap: DENSE_FRAME_CAP as u128 });
    }
    let f = frame_matrix(pair, n, &cands)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = greedy_rows(&f, k, rng.gen_range(0..cands.len()));
    let mut bounds = sub_bounds(&f, &chosen);
    let mut best = ratio(bounds.0, bounds.1);
    let mut outside: Vec<usize> = (0..cands.len()).filter(|i| !chosen.contains(i)).collect();
    for _ in 0..budget {
        if best <= 1.0 + 1e-12 || outside.is_empty() {
            break;
        }
        let a = rng.gen_range(0..chosen.len());
        let b = rng.gen_range(0..outside.len());
        std::mem::swap(&mut chosen[a], &mut outside[b]);
        let nb = sub_bounds(&f, &chosen);
        let nr = ratio(nb.0, nb.1);
        if nr < best {
            best = nr;
            bounds = nb;
        } else {
            std::mem::swap(&mut chosen[a], &mut outside[b]);
        }
    }
    chosen.sort();
    FrameReport::new(pair, n, chosen.iter().map(|&i| cands[i].clone()).collect(), bounds, Strategy::Greedy, seed)
}

/// Pivoted Gram-Schmidt on the rows: repeatedly take the row with the largest residual.
fn greedy_rows(f: &DMatrix<Complex64>, k: usize, first: usize) -> Vec<usize> {
    let m = f.nrows();
    let rows: Vec<Vec<Complex64>> = (0..m).map(|i| f.row(i).iter().cloned().collect()).collect();
    let mut resid = rows.clone();
    let mut chosen = Vec::with_capacity(k);
    let mut next = first;
    for _ in 0..k.min(m) {
        chosen.push(next);
        let q = resid[next].clone();
        let qn: f64 = q.iter().map(|x| x.norm_sqr()).sum();
        if qn > 1e-24 {
            resid.par_iter_mut().for_each(|r| {
                let c: Complex64 = q.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>() / qn;
                r.iter_mut().zip(&q).for_each(|(x, y)| *x -= c * y);
            });
        }
        let mut best = (usize::MAX, -1.0);
        for (i, r) in resid.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let v: f64 = r.iter().map(|x| x.norm_sqr()).sum();
            if v > best.1 + 1e-12 {
                best = (i, v);
            }
        }
        if best.0 == usize::MAX {
            break;
        }
        next = best.0;
    }
    chosen
}

/// Report for a caller-supplied level.
pub fn frame_report(pair: &AffinePair, n: usize, j: Vec<IVec>) -> Result<FrameReport> {
    let b = frame_matrix_bounds(pair, n, &j)?;
    FrameReport::new(pair, n, j, b, Strategy::Given, 0)
}

/// `(prod (1 - eps_j), prod (1 + eps_j))`.
pub fn concatenated_bounds(epsilons: &[f64]) -> Result<(f64, f64)> {
    let mut c = 1.0;
    let mut cap = 1.0;
    for (level, &e) in epsilons.iter().enumerate() {
        if !(e < 1.0) {
            return Err(Error::EpsilonTooLarge { level: level + 1, eps: e });
        }
        let e = e.max(0.0);
        c *= 1.0 - e;
        cap *= 1.0 + e;
    }
    Ok((c, cap))
}

/// `Lambda_k = J_1 + (R^T)^{m_1} J_2 + ...` for the given levels.
pub fn concatenate(r: &IntMatrix, levels: &[(usize, Vec<IVec>)]) -> Result<Vec<IVec>> {
    let rt = r.transpose();
    let d = r.dim();
    let mut out = vec![vec![0i64; d]];
    let mut m = 0usize;
    for (n, j) in levels {
        let shift = rt.pow(m as u32)?;
        let placed: Vec<IVec> = j.iter().map(|v| shift.mul_vec(v)).collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(out.len() * placed.len());
        for p in &placed {
            for v in &out {
                next.push(crate::intlat::mat::add_vec(v, p)?);
            }
        }
        out = next;
        m += n;
    }
    Ok(out)
}

/// Direct bounds of the concatenated matrix against the product bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcatCheck {
    pub c: f64,
    pub cap_c: f64,
    pub direct_min_sq: f64,
    pub direct_max_sq: f64,
    /// `c <= direct_min` and `direct_max <= C`, up to `1e-9`.
    pub holds: bool,
}

pub fn verify_concatenation(pair: &AffinePair, reports: &[FrameReport]) -> Result<ConcatCheck> {
    let eps: Vec<f64> = reports.iter().map(|r| r.epsilon()).collect();
    let (c, cap_c) = concatenated_bounds(&eps)?;
    let levels: Vec<(usize, Vec<IVec>)> = reports.iter().map(|r| (r.n, r.j.clone())).collect();
    let lambda = concatenate(pair.r(), &levels)?;
    let m: usize = reports.iter().map(|r| r.n).sum();
    let (lo, hi) = frame_matrix_bounds(pair, m, &lambda)?;
    let holds = c <= lo + 1e-9 && hi <= cap_c + 1e-9;
    Ok(ConcatCheck { c, cap_c, direct_min_sq: lo, direct_max_sq: hi, holds })
}

/// Statistics of `sum_lambda |<f, e_lambda>|^2 / |f|^2` over random level-`m` step functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectStats {
    pub level: usize,
    pub trials: usize,
    pub points: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// `sum_lambda |int f e_{-lambda} dmu|^2 / int |f|^2 dmu` for the step function with weights `w` on `B_m`.
pub fn parseval_ratio(eval: &FourierEval, lambda: &[IVec], m: usize, w: &[Complex64]) -> Result<f64> {
    let pair = eval.pair();
    let bm = digit_tower(pair.r(), pair.digits(), m)?;
    if w.len() != bm.len() {
        return Err(Error::SizeMismatch { left: w.len(), right: bm.len() });
    }
    let phase = InversePhase::new(&pair.r().pow(m as u32)?)?;
    let nm = bm.len() as f64;
    let norm_sq = w.iter().map(|x| x.norm_sqr()).sum::<f64>() / nm;
    if norm_sq == 0.0 {
        return Err(Error::InvalidInput("zero step function".into()));
    }
    let inv_t = pair.r().transpose().pow(m as u32)?.inverse()?.to_f64();
    let total: f64 = lambda
        .par_iter()
        .map(|l| {
            let s: Complex64 = bm.iter().zip(w).map(|(b, x)| x * Complex64::cis(-2.0 * PI * phase.frac(b, l))).sum();
            let xi = inv_t.apply(&l.iter().map(|&v| v as f64).collect::<Vec<_>>());
            eval.mu_hat(&xi).norm_sqr() * s.norm_sqr() / (nm * nm)
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total / norm_sq)
}

/// Random complex Gaussian step functions, seeded.
pub fn parseval_defect(eval: &FourierEval, lambda: &[IVec], m: usize, trials: usize, seed: u64) -> Result<DefectStats> {
    let count = (eval.pair().n() as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if count > FRAME_CAP {
        return Err(Error::CapExceeded { what: "step function weights", requested: count, cap: FRAME_CAP });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vals = Vec::with_capacity(trials);
    for _ in 0..trials {
        let w: Vec<Complex64> = (0..count).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        vals.push(parseval_ratio(eval, lambda, m, &w)?);
    }
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = if vals.is_empty() { f64::NAN } else { vals.iter().sum::<f64>() / vals.len() as f64 };
    Ok(DefectStats { level: m, trials, points: lambda.len(), min, max, mean })
}

/// One CSV row per report: level, strategy, ratio and wall time in seconds.
pub fn write_selection_csv<W: Write>(rows: &[(FrameReport, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "strategy", "ratio", "wall_time"]).map_err(|e| Error::Io(e.to_string()))?;
    for (r, t) in rows {
        let s = serde_json::to_value(r.strategy).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        w.write_record([r.n.to_string(), s, format!("{:.16e}", r.ratio), format!("{t:.16e}")]).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{middle_third, quarter_cantor};
    use crate::triples::tower;

    #[test]
    fn hadamard_tower_is_parseval() {
        let t = quarter_cantor();
        for n in 1..=3 {
            let tw = tower(&t, n).unwrap();
            let (lo, hi) = frame_matrix_bounds(&t.pair, n, &tw.l).unwrap();
            assert!((lo - 1.0).abs() < 1e-10 && (hi - 1.0).abs() < 1e-10, "{lo} {hi}");
        }
    }

    #[test]
    fn full_dual_set_is_tight() {
        for pair in [quarter_cantor().pair, middle_third()] {
            let det = pair.r().get(0, 0) as f64;
            for n in 1..=3 {
                let (lo, hi) = frame_matrix_bounds(&pair, n, &full_dual_set(&pair, n).unwrap()).unwrap();
                let expect = (det / pair.n() as f64).powi(n as i32);
                assert!((lo - expect).abs() < 1e-9 * expect && (hi - expect).abs() < 1e-9 * expect);
            }
        }
    }

    #[test]
    fn residue_collision_opens_a_gap() {
        let pair = quarter_cantor().pair;
        let (lo, hi) = frame_matrix_bounds(&pair, 1, &[vec![0], vec![4]]).unwrap();
        assert!(hi - lo >= 1.0, "{lo} {hi}");
        let r = frame_report(&pair, 1, vec![vec![0], vec![4]]).unwrap();
        assert!(!r.residues_distinct);
    }

    #[test]
    fn matrix_free_agrees_with_dense() {
        let pair = middle_third();
        let j = select_subset(&pair, 2, Strategy::Greedy, 3).unwrap().j;
        let dense = frame_matrix_bounds(&pair, 2, &j).unwrap();
        let free = frame_matrix_bounds_with(&pair, 2, &j, 0).unwrap();
        assert!((dense.0 - free.0).abs() < 1e-6 && (dense.1 - free.1).abs() < 1e-6, "{dense:?} {free:?}");
    }

    #[test]
    fn middle_third_exhaustive_level_one() {
        let pair = middle_third();
        let best = exhaustive_subset(&pair, 1, 10).unwrap();
        // Oracle: the three 2-subsets of {0,1,2}.
        let subsets = [[0, 1], [0, 2], [1, 2]];
        let oracle = subsets
            .iter()
            .map(|s| {
                let (lo, hi) = frame_matrix_bounds(&pair, 1, &s.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap();
                hi / lo
            })
            .fold(f64::INFINITY, f64::min);
        assert!((best.ratio - oracle).abs() < 1e-12);
        assert_eq!(best.j.len(), 2);
    }

    #[test]
    fn greedy_finds_a_parseval_level_for_jp() {
        let pair = quarter_cantor().pair;
        let r = select_subset(&pair, 2, Strategy::Greedy, 7).unwrap();
        assert!(r.ratio <= 1.0 + 1e-9, "{}", r.ratio);
        assert!(r.residues_distinct);
        assert_eq!(select_subset(&pair, 2, Strategy::Greedy, 7).unwrap(), r);
    }

    #[test]
    fn level_zero_is_a_singleton() {
        let r = select_subset(&middle_third(), 0, Strategy::Greedy, 1).unwrap();
        assert_eq!(r.j, vec![vec![0]]);
        assert_eq!(r.ratio, 1.0);
    }

    #[test]
    fn product_bounds() {
        assert_eq!(concatenated_bounds(&[0.0, 0.0]).unwrap(), (1.0, 1.0));
        let (c, cap) = concatenated_bounds(&[0.1, 0.1]).unwrap();
        assert!((c - 0.81).abs() < 1e-12 && (cap - 1.21).abs() < 1e-12);
        assert!(matches!(concatenated_bounds(&[0.1, 1.0]), Err(Error::EpsilonTooLarge { level: 2, .. })));
    }

    #[test]
    fn jp_concatenation_is_parseval() {
        let t = quarter_cantor();
        let reps: Vec<FrameReport> = (0..2).map(|_| frame_report(&t.pair, 1, t.l.clone()).unwrap()).collect();
        let chk = verify_concatenation(&t.pair, &reps).unwrap();
        assert!(chk.holds);
        assert!((chk.direct_min_sq - 1.0).abs() < 1e-10 && chk.direct_min_sq >= chk.c - 1e-10);
    }

    #[test]
    fn constant_function_ratio() {
        let t = quarter_cantor();
        let eval = FourierEval::new(&t.pair);
        let tw = tower(&t, 8).unwrap();
        let w = vec![Complex64::new(1.0, 0.0); 4];
        let r = parseval_ratio(&eval, &tw.l, 2, &w).unwrap();
        // Only lambda = 0 contributes a full term; the rest is the spectrum tail.
        assert!(r >= 0.9 && r <= 1.0 + 1e-9, "{r}");
    }

    #[test]
    fn jp_step_functions_are_nearly_parseval() {
        let t = quarter_cantor();
        let eval = FourierEval::new(&t.pair);
        let lambda = tower(&t, 10).unwrap().l;
        let s = parseval_defect(&eval, &lambda, 3, 50, 11).unwrap();
        assert!(s.min >= 0.9 && s.max <= 1.0 + 1e-6, "{s:?}");
    }

    #[test]
    fn selection_csv_has_a_header() {
        let r = frame_report(&quarter_cantor().pair, 1, vec![vec![0], vec![1]]).unwrap();
        let mut buf = Vec::new();
        write_selection_csv(&[(r, 0.5)], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("n,strategy,ratio,wall_time\n1,given,"));
    }
}
