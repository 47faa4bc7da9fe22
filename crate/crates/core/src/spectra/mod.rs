//! Candidate spectra built by concatenating digit levels, with the positive
//! lower bound `delta` that makes them complete.

mod cover;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{CoverConfig, ZeroSetConfig};
use crate::error::{Error, Result};
use crate::intlat::{translate_to_origin, IVec, IntMatrix, RatVec};
use crate::measure::{norm_inf, FourierEval};
use crate::triples::{digit_tower, validate_triple, AffinePair, HadamardTriple};
use crate::zeroset::{analyze, ZeroCertificate, ZeroSetStatus};

pub use cover::{build_cover, Cover, CoverCertificate};

/// A shift `k(j)` applied as `j + (R^T)^n k(j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correction {
    pub j: IVec,
    pub k: IVec,
}

/// One level `J_{n_k}` of the tree, already corrected. `digits[0]` is `0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeLevel {
    pub n: usize,
    pub digits: Vec<IVec>,
    pub corrections: Vec<Correction>,
}

/// `Lambda_k = J_{n_1} + (R^T)^{m_1} J_{n_2} + ... + (R^T)^{m_{k-1}} J_{n_k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTree {
    /// The matrix `R`; levels are placed with `R^T`.
    pub r: IntMatrix,
    pub levels: Vec<TreeLevel>,
    /// Certified lower bound on `delta(Lambda)`.
    pub delta_hat: Option<f64>,
    pub cover: Option<CoverCertificate>,
}

impl SpectrumTree {
    pub fn new(r: IntMatrix, levels: Vec<TreeLevel>) -> Result<Self> {
        let d = r.dim();
        for lv in &levels {
            if lv.n == 0 {
                return Err(Error::InvalidInput("level with n = 0".into()));
            }
            if lv.digits.first().map_or(true, |z| z.iter().any(|&x| x != 0)) {
                return Err(Error::InvalidInput("every level must start with 0".into()));
            }
            if lv.digits.iter().any(|v| v.len() != d) {
                return Err(Error::DimensionMismatch(format!("level digits must have length {d}")));
            }
        }
        Ok(Self { r, levels, delta_hat: None, cover: None })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// `m_k = n_1 + ... + n_k`.
    pub fn m(&self, k: usize) -> usize {
        self.levels[..k].iter().map(|l| l.n).sum()
    }

    /// Number of points of `Lambda_k`.
    pub fn size(&self, k: usize) -> u128 {
        self.levels[..k].iter().map(|l| l.digits.len() as u128).product()
    }

    /// Enumerates `Lambda_k`; `Lambda_{k-1}` is a prefix of the result.
    pub fn lambda(&self, k: usize, cap: u128) -> Result<Vec<IVec>> {
        if k > self.depth() {
            return Err(Error::InvalidInput(format!("tree has depth {}, asked for level {k}", self.depth())));
        }
        let requested = self.size(k);
        if requested > cap {
            return Err(Error::CapExceeded { what: "spectrum enumeration", requested, cap });
        }
        let rt = self.r.transpose();
        let mut out = vec![vec![0i64; self.r.dim()]];
        for (i, lv) in self.levels[..k].iter().enumerate() {
            let t = rt.pow(self.m(i) as u32)?;
            let shifted: Vec<IVec> = lv.digits.iter().map(|j| t.mul_vec(j)).collect::<Result<_>>()?;
            let mut next = Vec::with_capacity(out.len() * shifted.len());
            for s in &shifted {
                for l in &out {
                    next.push(crate::intlat::mat::add_vec(l, s)?);
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// Validates `(R^{m_k}, B_{m_k}, Lambda_k)` as a Hadamard triple.
    pub fn level_triple(&self, pair: &AffinePair, k: usize) -> Result<(bool, f64)> {
        let m = self.m(k);
        let rm = self.r.pow(m as u32)?;
        let bm = digit_tower(pair.r(), pair.digits(), m)?;
        let lam = self.lambda(k, crate::config::ENUMERATION_CAP)?;
        validate_triple(&rm, &bm, &lam)
    }
}

fn dual_digits(triple: &HadamardTriple) -> Vec<IVec> {
    translate_to_origin(&triple.l).0
}

/// `n_k = 1`, `J_k = L`: `Lambda_K = L + R^T L + ... + (R^T)^{K-1} L`.
pub fn canonical_tree(triple: &HadamardTriple, depth: usize) -> Result<SpectrumTree> {
    let l = dual_digits(triple);
    let levels = vec![TreeLevel { n: 1, digits: l, corrections: Vec::new() }; depth];
    let tree = SpectrumTree::new(triple.r().clone(), levels)?;
    tree.lambda(depth, crate::config::ENUMERATION_CAP)?;
    Ok(tree)
}

/// Builds levels with shift corrections from a Lipschitz cover of the dual attractor.
///
/// Fails with `ZeroSetNonEmpty` when the periodic zero set is certified non-empty.
pub fn corrected_tree(triple: &HadamardTriple, depth: usize, cfg: &CoverConfig, zcfg: &ZeroSetConfig) -> Result<SpectrumTree> {
    let eval = FourierEval::new(&triple.pair);
    let analysis = analyze(&eval, zcfg);
    if let ZeroSetStatus::NonEmpty { witness } = analysis.status {
        return Err(Error::ZeroSetNonEmpty { witness: witness.to_string() });
    }
    build_corrected(triple, &eval, depth, cfg)
}

pub(crate) fn build_corrected(triple: &HadamardTriple, eval: &FourierEval, depth: usize, cfg: &CoverConfig) -> Result<SpectrumTree> {
    let l = dual_digits(triple);
    let rt = triple.r().transpose();
    let dual = AffinePair::from_parts(rt.clone(), l.clone())?;
    let cover = build_cover(eval, &dual, cfg)?;
    let eps0 = cover.cert.eps0;
    let c = eval.sup_norm();
    let nmax = triple.n() as u128;
    let mut tree = SpectrumTree::new(triple.r().clone(), Vec::new())?;
    let mut lambda = vec![vec![0i64; triple.dim()]];
    let mut prev_n = 0usize;
    for k in 0..depth {
        let lf: Vec<Vec<f64>> = lambda.iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect();
        let mut n = prev_n + 1;
        loop {
            let worst = lf.par_iter().map(|v| norm_inf(&eval.contract(v, n))).reduce(|| 0.0, f64::max);
            if worst * c < eps0 {
                break;
            }
            n += 1;
            if n > crate::config::MU_HAT_MAX_DEPTH {
                return Err(Error::Undecided(format!("no admissible n at level {}", k + 1)));
            }
        }
        let requested = nmax.checked_pow(n as u32).unwrap_or(u128::MAX);
        if requested > cfg.cap {
            return Err(Error::CapExceeded { what: "level digits", requested, cap: cfg.cap });
        }
        let jn = digit_tower(&rt, &l, n)?;
        let tn = rt.pow(n as u32)?;
        let mut digits = Vec::with_capacity(jn.len());
        let mut corrections = Vec::new();
        for j in &jn {
            let kj = if j.iter().all(|&x| x == 0) {
                vec![0; j.len()]
            } else {
                let x = eval.contract(&j.iter().map(|&v| v as f64).collect::<Vec<_>>(), n);
                cover.shift_for(&x)
            };
            if kj.iter().any(|&x| x != 0) {
                let shift = tn.mul_vec(&kj)?;
                digits.push(crate::intlat::mat::add_vec(j, &shift)?);
                corrections.push(Correction { j: j.clone(), k: kj });
            } else {
                digits.push(j.clone());
            }
        }
        tree.levels.push(TreeLevel { n, digits, corrections });
        prev_n = n;
        if k + 1 < depth {
            lambda = tree.lambda(k + 1, cfg.cap)?;
        }
    }
    tree.delta_hat = Some(cover.cert.delta0);
    tree.cover = Some(cover.cert);
    Ok(tree)
}

/// `min_{k <= K} min_{lambda in Lambda_k} |mu_hat((R^T)^{-m_k} lambda)|^2`.
pub fn delta_lower_bound(tree: &SpectrumTree, eval: &FourierEval, k: usize) -> Result<f64> {
    let mut best = 1.0f64;
    for i in 1..=k {
        let m = tree.m(i);
        let lam = tree.lambda(i, crate::config::ENUMERATION_CAP)?;
        let v = lam
            .par_iter()
            .map(|l| eval.mu_hat(&eval.contract(&l.iter().map(|&x| x as f64).collect::<Vec<_>>(), m)).norm_sqr())
            .reduce(|| 1.0, f64::min);
        best = best.min(v);
    }
    Ok(best)
}

/// Largest number of distinct differences evaluated by [`orthogonality_check`].
pub const DIFFERENCE_CAP: usize = 1 << 22;

/// `max_{lambda != lambda'} |mu_hat(lambda - lambda')|` over a finite set.
pub fn max_cross_term(eval: &FourierEval, points: &[IVec]) -> Result<f64> {
    let mut diffs = std::collections::HashSet::new();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d: IVec = a.iter().zip(b).map(|(x, y)| x - y).collect();
            // mu_hat(-xi) is the conjugate of mu_hat(xi).
            let neg: IVec = d.iter().map(|x| -x).collect();
            diffs.insert(if d > neg { d } else { neg });
            if diffs.len() > DIFFERENCE_CAP {
                return Err(Error::CapExceeded { what: "difference set", requested: diffs.len() as u128, cap: DIFFERENCE_CAP as u128 });
            }
        }
    }
    let diffs: Vec<IVec> = diffs.into_iter().collect();
    Ok(diffs
        .par_iter()
        .map(|d| eval.mu_hat(&d.iter().map(|&x| x as f64).collect::<Vec<_>>()).norm())
        .reduce(|| 0.0, f64::max))
}

pub fn orthogonality_check(tree: &SpectrumTree, eval: &FourierEval, k: usize) -> Result<f64> {
    max_cross_term(eval, &tree.lambda(k, crate::config::ENUMERATION_CAP)?)
}

/// `sum_{lambda} |mu_hat(xi + lambda)|^2` over a finite set.
pub fn jp_sum(eval: &FourierEval, points: &[IVec], xi: &[f64]) -> f64 {
    points
        .par_iter()
        .map(|l| {
            let y: Vec<f64> = xi.iter().zip(l).map(|(a, &b)| a + b as f64).collect();
            eval.mu_hat(&y).norm_sqr()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// `Q_K(xi) = sum_{lambda in Lambda_K} |mu_hat(xi + lambda)|^2`.
pub fn jp_partial(tree: &SpectrumTree, eval: &FourierEval, k: usize, xi: &[f64]) -> Result<f64> {
    Ok(jp_sum(eval, &tree.lambda(k, crate::config::ENUMERATION_CAP)?, xi))
}

/// `(xi, Q_K(xi))` over the given points.
pub fn jp_sweep(eval: &FourierEval, points: &[IVec], grid: &[Vec<f64>]) -> Vec<(Vec<f64>, f64)> {
    grid.iter().map(|xi| (xi.clone(), jp_sum(eval, points, xi))).collect()
}

pub fn write_lambda_csv<W: Write>(points: &[IVec], out: W) -> Result<()> {
    let d = points.first().map_or(0, |p| p.len());
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (0..d).map(|i| format!("l{i}")).collect();
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for p in points {
        w.write_record(p.iter().map(|x| x.to_string())).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(rows: &[(Vec<f64>, f64)], out: W) -> Result<()> {
    let d = rows.first().map_or(0, |r| r.0.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..d).map(|i| format!("xi{i}")).collect();
    header.push("q".into());
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for (xi, q) in rows {
        let mut rec: Vec<String> = xi.iter().map(|x| format!("{x:.16e}")).collect();
        rec.push(format!("{q:.16e}"));
        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Whether the measure has a spectrum inside `Z^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ZdDecision {
    SpectralWithIntegerSpectrum { tree: SpectrumTree },
    NoIntegerSpectrum { witness: RatVec, certificate: ZeroCertificate },
}

/// Decides through the periodic zero set; the caller reduces to `Z[R,B] = Z^d` first.
pub fn zd_spectrum_decision(triple: &HadamardTriple, depth: usize, cfg: &CoverConfig, zcfg: &ZeroSetConfig) -> Result<ZdDecision> {
    let eval = FourierEval::new(&triple.pair);
    let analysis = analyze(&eval, zcfg);
    match analysis.status {
        ZeroSetStatus::Empty { .. } => Ok(ZdDecision::SpectralWithIntegerSpectrum { tree: build_corrected(triple, &eval, depth, cfg)? }),
        ZeroSetStatus::NonEmpty { witness } => {
            let certificate = analysis.certificates.into_iter().find(|c| c.is_in()).expect("certified witness");
            Ok(ZdDecision::NoIntegerSpectrum { witness, certificate })
        }
        ZeroSetStatus::Undecided => Err(Error::Undecided(format!(
            "zero-set scan left {} candidates uncertified",
            analysis.scan.map_or(0, |s| s.candidates.len())
        ))),
    }
}
