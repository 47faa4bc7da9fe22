//! The periodic zero set `{xi : mu_hat(xi + k) = 0 for all k in Z^d}`.

mod cycle;
pub mod roots;

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ZeroSetConfig, MASK_ZERO_TOL, TRANSITION_TOL};
use crate::intlat::{translate_to_origin, IVec, RatVec};
use crate::measure::{lipschitz_bound, FourierEval};
use crate::triples::AffinePair;

pub use cycle::{descent_holds, find_invariant_cycle, rational_invariant_subspaces, CycleStep, InvariantCycle};

/// Whether a certificate rests on exact arithmetic throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Exact,
    /// Some mask value was only shown to be below the numeric tolerance.
    Numeric,
}

impl Grade {
    pub fn and(self, other: Grade) -> Grade {
        if self == Grade::Exact && other == Grade::Exact {
            Grade::Exact
        } else {
            Grade::Numeric
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CertStatus {
    /// Every shift in the window has a vanishing factor.
    CertifiedIn,
    /// `mu_hat(xi + k) != 0` is proved for this `k`.
    CertifiedOutWitness { k: IVec },
    Inconclusive,
}

/// Level `j` at which `M_B((R^T)^{-j}(xi + k))` vanishes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub k: IVec,
    pub level: usize,
}

/// Evidence that a rational point lies in the periodic zero set, or not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroCertificate {
    pub point: RatVec,
    pub window: i64,
    pub levels: usize,
    pub status: CertStatus,
    pub witnesses: Vec<Witness>,
    pub grade: Grade,
}

impl ZeroCertificate {
    pub fn is_in(&self) -> bool {
        self.status == CertStatus::CertifiedIn
    }
}

/// Integer shifts in `[-K, K]^d`, ordered by max-norm and then lexicographically.
pub fn window_shifts(d: usize, k: i64) -> Vec<IVec> {
    let mut out: Vec<IVec> = vec![Vec::new()];
    for _ in 0..d {
        out = out.into_iter().flat_map(|v| (-k..=k).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out.sort_by_key(|v| (v.iter().map(|x| x.abs()).max().unwrap_or(0), v.clone()));
    out
}

/// Outcome of following one shift `xi + k` down the levels.
#[derive(Debug, Clone, PartialEq)]
enum ShiftOutcome {
    Zero { level: usize, grade: Grade },
    NonZero { grade: Grade },
    Unknown,
}

fn follow_shift(eval: &FourierEval, x: &[BigRational], levels: usize) -> ShiftOutcome {
    let digits = eval.pair().digits();
    let lip = 2.0 * PI * eval.pair().max_digit_l1() * eval.sup_norm();
    let mut grade = Grade::Exact;
    let mut y = x.to_vec();
    for j in 1..=levels {
        y = eval.inv_t().mul_vec(&y);
        let yf = RatVec(y.clone()).to_f64();
        // From here on every factor is within distance < 1 of M_B(0) = 1.
        if crate::measure::norm_inf(&yf) * lip < 1.0 - 1e-9 {
            return ShiftOutcome::NonZero { grade };
        }
        match roots::mask_vanishes(digits, &y) {
            Some(true) => return ShiftOutcome::Zero { level: j, grade },
            Some(false) => {}
            None => {
                if eval.pair().mask(&yf).norm() < MASK_ZERO_TOL {
                    return ShiftOutcome::Zero { level: j, grade: Grade::Numeric };
                }
                grade = Grade::Numeric;
            }
        }
    }
    ShiftOutcome::Unknown
}

/// Certifies membership of a rational point in the periodic zero set over the window `[-K, K]^d`.
pub fn certify_zero(eval: &FourierEval, xi: &RatVec, window: i64, levels: usize) -> ZeroCertificate {
    let shifts = window_shifts(xi.len(), window);
    let outcomes: Vec<ShiftOutcome> = shifts.par_iter().map(|k| follow_shift(eval, &xi.add_int(k).0, levels)).collect();
    let mut grade = Grade::Exact;
    let mut witnesses = Vec::new();
    let mut status = CertStatus::CertifiedIn;
    for (k, out) in shifts.iter().zip(&outcomes) {
        match out {
            ShiftOutcome::Zero { level, grade: g } => {
                grade = grade.and(*g);
                witnesses.push(Witness { k: k.clone(), level: *level });
            }
            ShiftOutcome::NonZero { grade: g } => {
                if !matches!(status, CertStatus::CertifiedOutWitness { .. }) {
                    status = CertStatus::CertifiedOutWitness { k: k.clone() };
                    grade = *g;
                }
            }
            ShiftOutcome::Unknown => {
                if status == CertStatus::CertifiedIn {
                    status = CertStatus::Inconclusive;
                }
            }
        }
    }
    if let CertStatus::CertifiedOutWitness { .. } = status {
        witnesses.clear();
    }
    ZeroCertificate { point: xi.clone(), window, levels, status, witnesses, grade }
}

/// Re-derives a certificate and compares it with the stored one.
pub fn replay_certificate(eval: &FourierEval, cert: &ZeroCertificate) -> bool {
    let fresh = certify_zero(eval, &cert.point, cert.window, cert.levels);
    fresh == *cert
}

/// Shortcut in dimension one: `gcd(B - b0) = 1` forces an empty zero set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FastPath {
    Empty,
    Unknown,
}

pub fn gcd_fast_path_1d(pair: &AffinePair) -> FastPath {
    if pair.dim() != 1 {
        return FastPath::Unknown;
    }
    let (b, _) = translate_to_origin(pair.digits());
    let g = b.iter().fold(0i64, |acc, v| acc.gcd(&v[0]));
    if g == 1 {
        FastPath::Empty
    } else {
        FastPath::Unknown
    }
}

/// A snapped rational point whose window maximum of `|mu_hat|` is below the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub point: RatVec,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// Number of finest cells covering `[0,1)^d`.
    pub grid_points: usize,
    /// Finest cells not excluded by the Lipschitz test.
    pub survivors: usize,
    /// Cells of all sizes at which `mu_hat` was evaluated.
    pub evaluated: usize,
    pub lipschitz: f64,
    pub candidates: Vec<Candidate>,
}

/// Absorbs rounding in the evaluation of `mu_hat`.
const EVAL_SLACK: f64 = 1e-9;

struct Cell {
    corner: Vec<f64>,
    hint: IVec,
}

/// Scan of `[0,1)^d` for points with `max_k |mu_hat(xi + k)|` small.
///
/// Dyadic cells are refined down to side `h` (rounded to a power of two). A
/// cell of side `s` and center `c` is excluded when some shift has
/// `|mu_hat(c + k)| > L s / 2`, with `L` a Lipschitz constant of `mu_hat`;
/// then `mu_hat(. + k)` has no zero on it. If no cell survives, the zero set is empty.
pub fn scan_zero_set(eval: &FourierEval, cfg: &ZeroSetConfig) -> ScanResult {
    let d = eval.pair().dim();
    let lipschitz = lipschitz_bound(eval.pair());
    let levels = (1.0 / cfg.step).log2().ceil().max(0.0) as u32;
    let shifts = window_shifts(d, cfg.window);
    let mut cells = vec![Cell { corner: vec![0.0; d], hint: vec![0; d] }];
    let mut evaluated = 0;
    let mut side = 1.0;
    for level in 0..=levels {
        evaluated += cells.len();
        let threshold = lipschitz * side / 2.0 + EVAL_SLACK;
        let kept: Vec<Cell> = cells
            .into_par_iter()
            .filter_map(|cell| {
                let center: Vec<f64> = cell.corner.iter().map(|c| c + side / 2.0).collect();
                let mut best = (cell.hint.clone(), -1.0f64);
                for k in std::iter::once(&cell.hint).chain(&shifts) {
                    let x: Vec<f64> = center.iter().zip(k).map(|(a, &b)| a + b as f64).collect();
                    if let Some(v) = eval.abs_above(&x, best.1.max(0.0)) {
                        if v > threshold {
                            return None;
                        }
                        best = (k.clone(), v);
                    }
                }
                Some(Cell { corner: cell.corner, hint: best.0 })
            })
            .collect();
        if level == levels {
            cells = kept;
            break;
        }
        side /= 2.0;
        cells = kept
            .iter()
            .flat_map(|c| {
                (0..1usize << d).map(move |mask| Cell {
                    corner: c.corner.iter().enumerate().map(|(i, x)| if mask >> i & 1 == 1 { x + side } else { *x }).collect(),
                    hint: c.hint.clone(),
                })
            })
            .collect();
    }
    let h = side;
    let snapped: BTreeSet<RatVec> = cells
        .iter()
        .map(|c| snap(&c.corner.iter().map(|x| x + h / 2.0).collect::<Vec<_>>(), h, cfg.denominator))
        .collect();
    let mut kept: Vec<RatVec> = snapped
        .into_par_iter()
        .filter(|p| {
            let pf = p.to_f64();
            shifts.iter().all(|k| {
                let x: Vec<f64> = pf.iter().zip(k).map(|(a, &b)| a + b as f64).collect();
                eval.abs_above(&x, cfg.tau).is_none()
            })
        })
        .collect();
    kept.sort_by(|a, b| (a.max_denom(), a).cmp(&(b.max_denom(), b)));
    kept.truncate(cfg.max_candidates);
    let candidates = kept
        .into_par_iter()
        .map(|p| {
            let pf = p.to_f64();
            let max_abs = shifts
                .iter()
                .map(|k| eval.mu_hat(&pf.iter().zip(k).map(|(a, &b)| a + b as f64).collect::<Vec<_>>()).norm())
                .fold(0.0, f64::max);
            Candidate { point: p, max_abs }
        })
        .collect();
    ScanResult { grid_points: 1usize << (levels as usize * d), survivors: cells.len(), evaluated, lipschitz, candidates }
}

/// Nearest small-denominator rational within `h` of each coordinate, reduced mod 1.
fn snap(g: &[f64], h: f64, max_den: i64) -> RatVec {
    let coords = g
        .iter()
        .map(|&x| {
            for q in 1..=max_den {
                let p = (x * q as f64).round();
                if (x - p / q as f64).abs() <= h {
                    return BigRational::new(BigInt::from(p as i64), BigInt::from(q));
                }
            }
            let q = max_den;
            BigRational::new(BigInt::from((x * q as f64).round() as i64), BigInt::from(q))
        })
        .collect();
    RatVec(coords).mod_one()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ZeroSetStatus {
    /// Proved empty; `method` is `gcd` or `grid_cover`.
    Empty { method: String },
    NonEmpty { witness: RatVec },
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetAnalysis {
    pub status: ZeroSetStatus,
    pub scan: Option<ScanResult>,
    pub certificates: Vec<ZeroCertificate>,
}

/// Fast path, then scan, then certification of the candidates in order.
pub fn analyze(eval: &FourierEval, cfg: &ZeroSetConfig) -> ZeroSetAnalysis {
    if gcd_fast_path_1d(eval.pair()) == FastPath::Empty {
        return ZeroSetAnalysis { status: ZeroSetStatus::Empty { method: "gcd".into() }, scan: None, certificates: Vec::new() };
    }
    let scan = scan_zero_set(eval, cfg);
    if scan.survivors == 0 {
        return ZeroSetAnalysis { status: ZeroSetStatus::Empty { method: "grid_cover".into() }, scan: Some(scan), certificates: Vec::new() };
    }
    let mut certificates = Vec::new();
    for c in &scan.candidates {
        let cert = certify_zero(eval, &c.point, cfg.window, cfg.levels);
        let done = cert.is_in();
        certificates.push(cert);
        if done {
            let witness = c.point.clone();
            return ZeroSetAnalysis { status: ZeroSetStatus::NonEmpty { witness }, scan: Some(scan), certificates };
        }
    }
    ZeroSetAnalysis { status: ZeroSetStatus::Undecided, scan: Some(scan), certificates }
}

/// One transition `x -> (R^T)^{-1}(x + l)` with its weight `u_B` at the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub l: IVec,
    pub target: RatVec,
    pub u: f64,
    pub possible: bool,
}

/// `u_B` at a rational point, from exact phases.
pub fn u_rational(pair: &AffinePair, y: &[BigRational]) -> f64 {
    let mut acc = Complex64::zero();
    for b in pair.digits() {
        let t = b.iter().zip(y).fold(BigRational::zero(), |acc, (&bi, yi)| acc + yi * BigInt::from(bi));
        acc += Complex64::cis(-2.0 * PI * crate::measure::frac_of(&t));
    }
    (acc / pair.n() as f64).norm_sqr()
}

/// All transitions from `x` using the digits `reps`; possibility is decided exactly when the mask allows it.
pub fn transition_targets(eval: &FourierEval, x: &RatVec, reps: &[IVec]) -> Vec<Transition> {
    reps.iter()
        .map(|l| {
            let target = RatVec(eval.inv_t().mul_vec(&x.add_int(l).0));
            let u = u_rational(eval.pair(), &target.0);
            let possible = match roots::mask_vanishes(eval.pair().digits(), &target.0) {
                Some(v) => !v,
                None => u > TRANSITION_TOL,
            };
            Transition { l: l.clone(), target, u, possible }
        })
        .collect()
}
