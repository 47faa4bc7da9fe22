//! The computations behind each subcommand, as pure functions of a problem file.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::problem::ProblemFile;
use crate::config::{DENSE_FRAME_CAP, FRAME_CAP};
use crate::error::{Error, Result};
use crate::frames::{
    frame_report, frame_spectrum_build, select_subset, tsosc_check, verify_concatenation, ConcatCheck, FrameReport, FrameSpectrum, Strategy,
    TsoscReport,
};
use crate::intlat::{is_simple_digit_set, reduce_to_full, ConjugationRecord, IVec, LatticeSummary};
use crate::measure::FourierEval;
use crate::quasiprod::{full_spectrum, quasi_product, Branch, QuasiProductAnalysis, SpectrumReport};
use crate::triples::{digit_tower, tower, validate_triple};
use crate::zeroset::{analyze, find_invariant_cycle, replay_certificate, InvariantCycle, ScanResult, ZeroCertificate, ZeroSetStatus};

/// Largest tower matrix checked by `validate`.
const TOWER_CHECK_CAP: u128 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "command")]
pub enum Job {
    Validate { tower_depth: usize },
    Spectrum,
    Zeroset,
    Frames { levels: Vec<usize>, strategy: Strategy },
    Quasiprod,
    Reduce,
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Validate { .. } => "validate",
            Job::Spectrum => "spectrum",
            Job::Zeroset => "zeroset",
            Job::Frames { .. } => "frames",
            Job::Quasiprod => "quasiprod",
            Job::Reduce => "reduce",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Ok,
    /// The input is well formed but fails the mathematical requirement, e.g. a non-triple.
    Refused,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Ok => 0,
            Verdict::Refused => 3,
            Verdict::Inconclusive => 4,
        }
    }
}

/// A claim that can be re-checked from its own data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Certificate {
    Zero { r: Vec<IVec>, b: Vec<IVec>, cert: ZeroCertificate },
    Cycle { r: Vec<IVec>, b: Vec<IVec>, cycle: InvariantCycle },
}

impl Certificate {
    pub fn replay(&self) -> Result<bool> {
        let (r, b) = match self {
            Certificate::Zero { r, b, .. } | Certificate::Cycle { r, b, .. } => (r, b),
        };
        let eval = FourierEval::new(&crate::triples::AffinePair::new(crate::intlat::IntMatrix::new(r.clone())?, b.clone())?);
        Ok(match self {
            Certificate::Zero { cert, .. } => replay_certificate(&eval, cert),
            Certificate::Cycle { cycle, .. } => cycle.check(&eval),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub results: Value,
    pub certificates: Vec<Certificate>,
    pub verdict: Verdict,
    /// Per-level selection times of `frames`, kept out of the results.
    pub level_seconds: Vec<f64>,
}

fn outcome<T: Serialize>(results: &T, certificates: Vec<Certificate>, verdict: Verdict) -> Outcome {
    Outcome { results: serde_json::to_value(results).expect("results serialize"), certificates, verdict, level_seconds: Vec::new() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerCheck {
    pub k: usize,
    pub valid: bool,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateResults {
    pub dim: usize,
    pub n: usize,
    pub valid: bool,
    pub defect: f64,
    pub b_simple: bool,
    pub l_simple: bool,
    pub towers: Vec<TowerCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResults {
    pub report: SpectrumReport,
    /// Spectrum points as exact rationals.
    pub sample: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetResults {
    pub status: ZeroSetStatus,
    pub scan: Option<ScanResult>,
    pub certified: usize,
    pub cycle: Option<InvariantCycle>,
    pub cycle_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramesResults {
    pub levels: Vec<FrameReport>,
    /// `prod (1 - eps)` and `prod (1 + eps)`, absent when some `eps >= 1`.
    pub bounds: Option<(f64, f64)>,
    pub concatenation: Option<ConcatCheck>,
    /// The dual tower `L_n` of the last level, when `L` is given.
    pub tower: Option<FrameReport>,
    pub tsosc: Option<TsoscReport>,
    pub tsosc_error: Option<String>,
    pub spectrum: Option<FrameSpectrum>,
    pub spectrum_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReduceResults {
    pub reduced_dim: usize,
    pub trivial: bool,
    pub lattice: LatticeSummary,
    pub r_full: Vec<Vec<String>>,
    pub r: Vec<IVec>,
    pub digits: Vec<IVec>,
    pub dual: Option<Vec<IVec>>,
    pub record: crate::intlat::reduce::ConjugationSummary,
}

pub fn execute(job: &Job, problem: &ProblemFile) -> Result<Outcome> {
    match job {
        Job::Validate { tower_depth } => validate(problem, *tower_depth),
        Job::Spectrum => spectrum(problem),
        Job::Zeroset => zeroset(problem),
        Job::Frames { levels, strategy } => frames(problem, levels, *strategy),
        Job::Quasiprod => quasiprod(problem),
        Job::Reduce => reduce(problem),
    }
}

fn validate(problem: &ProblemFile, depth: usize) -> Result<Outcome> {
    let pair = problem.pair()?;
    let l = problem.dual()?.ok_or_else(|| Error::InvalidInput("the problem has no dual digit set L".into()))?;
    let (valid, defect) = validate_triple(pair.r(), pair.digits(), &l)?;
    let mut towers = Vec::new();
    if valid {
        let triple = problem.triple()?;
        for k in 1..=depth {
            if (pair.n() as u128).checked_pow(k as u32).map_or(true, |c| c > TOWER_CHECK_CAP) {
                break;
            }
            let t = tower(&triple, k)?;
            let (ok, defect) = validate_triple(t.r(), t.b(), &t.l)?;
            towers.push(TowerCheck { k, valid: ok, defect });
        }
    }
    let res = ValidateResults {
        dim: pair.dim(),
        n: pair.n(),
        valid,
        defect,
        b_simple: pair.is_simple()?,
        l_simple: is_simple_digit_set(&pair.r().transpose(), &l)?,
        towers,
    };
    Ok(outcome(&res, Vec::new(), if valid { Verdict::Ok } else { Verdict::Refused }))
}

fn reduced_pair(problem: &ProblemFile) -> Result<(Vec<IVec>, Vec<IVec>)> {
    let red = reduce_to_full(&problem.matrix()?, &problem.digits()?, problem.dual()?.as_deref())?;
    Ok((red.r.to_rows(), red.digits))
}

fn spectrum(problem: &ProblemFile) -> Result<Outcome> {
    let triple = problem.triple()?;
    let report = full_spectrum(&triple, &problem.config)?;
    let mut certs = Vec::new();
    if let Branch::QuasiProduct { cycle, .. } = &report.branch {
        let (r, b) = reduced_pair(problem)?;
        certs.push(Certificate::Cycle { r, b, cycle: cycle.clone() });
    }
    let sample = report.sample.iter().map(|p| p.to_strings()).collect();
    Ok(outcome(&SpectrumResults { report, sample }, certs, Verdict::Ok))
}

fn zeroset(problem: &ProblemFile) -> Result<Outcome> {
    let pair = problem.pair()?;
    let eval = FourierEval::new(&pair);
    let analysis = analyze(&eval, &problem.config.zero);
    let r = pair.r().to_rows();
    let mut certs: Vec<Certificate> =
        analysis.certificates.iter().map(|c| Certificate::Zero { r: r.clone(), b: pair.digits().to_vec(), cert: c.clone() }).collect();
    let (mut cycle, mut cycle_error) = (None, None);
    if matches!(analysis.status, ZeroSetStatus::NonEmpty { .. }) {
        match find_invariant_cycle(&eval, &problem.config.zero) {
            Ok(c) => {
                certs.push(Certificate::Cycle { r: r.clone(), b: pair.digits().to_vec(), cycle: c.clone() });
                cycle = Some(c);
            }
            Err(e) => cycle_error = Some(e.to_string()),
        }
    }
    let verdict = if analysis.status == ZeroSetStatus::Undecided { Verdict::Inconclusive } else { Verdict::Ok };
    let res = ZeroSetResults {
        certified: analysis.certificates.iter().filter(|c| c.is_in()).count(),
        status: analysis.status,
        scan: analysis.scan,
        cycle,
        cycle_error,
    };
    Ok(outcome(&res, certs, verdict))
}

fn frames(problem: &ProblemFile, levels: &[usize], strategy: Strategy) -> Result<Outcome> {
    if levels.is_empty() || levels.contains(&0) {
        return Err(Error::InvalidInput("frame levels must be at least 1".into()));
    }
    let pair = problem.pair()?;
    for &n in levels {
        let size = (pair.n() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if size > FRAME_CAP {
            return Err(Error::CapExceeded { what: "frame level", requested: size, cap: FRAME_CAP });
        }
    }
    let mut reports = Vec::with_capacity(levels.len());
    let mut seconds = Vec::with_capacity(levels.len());
    for (i, &n) in levels.iter().enumerate() {
        let start = Instant::now();
        reports.push(select_subset(&pair, n, strategy, problem.seed + i as u64)?);
        seconds.push(start.elapsed().as_secs_f64());
    }
    let eps: Vec<f64> = reports.iter().map(|r| r.epsilon()).collect();
    let bounds = crate::frames::concatenated_bounds(&eps).ok();
    let total: usize = levels.iter().sum();
    let small = (pair.n() as u128).checked_pow(total as u32).map_or(false, |c| c <= DENSE_FRAME_CAP as u128);
    let concatenation = if bounds.is_some() && small { Some(verify_concatenation(&pair, &reports)?) } else { None };
    let dual = problem.dual()?;
    let tower = match &dual {
        Some(l) if problem.triple().is_ok() => {
            let n = *levels.last().expect("non-empty levels");
            Some(frame_report(&pair, n, digit_tower(&pair.r().transpose(), l, n)?)?)
        }
        _ => None,
    };
    let (tsosc, tsosc_error) = match tsosc_check(&pair) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (spectrum, spectrum_error) = match frame_spectrum_build(&pair, &reports, dual.as_deref(), &problem.config.cover, &problem.config.zero) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let res = FramesResults { levels: reports, bounds, concatenation, tower, tsosc, tsosc_error, spectrum, spectrum_error };
    let mut out = outcome(&res, Vec::new(), Verdict::Ok);
    out.level_seconds = seconds;
    Ok(out)
}

fn quasiprod(problem: &ProblemFile) -> Result<Outcome> {
    let qp: QuasiProductAnalysis = quasi_product(&problem.triple()?, &problem.config)?;
    let certs = match &qp.cycle {
        Some(c) => vec![Certificate::Cycle { r: qp.reduced_r.to_rows(), b: qp.reduced_b.clone(), cycle: c.clone() }],
        None => Vec::new(),
    };
    Ok(outcome(&qp, certs, Verdict::Ok))
}

fn reduce(problem: &ProblemFile) -> Result<Outcome> {
    let red = reduce_to_full(&problem.matrix()?, &problem.digits()?, problem.dual()?.as_deref())?;
    let record: &ConjugationRecord = &red.record;
    let res = ReduceResults {
        reduced_dim: red.reduced_dim,
        trivial: red.is_trivial(),
        lattice: LatticeSummary::from(&red.lattice),
        r_full: red.r_full.to_rows().iter().map(|row| row.iter().map(|x| x.to_string()).collect()).collect(),
        r: red.r.to_rows(),
        digits: red.digits.clone(),
        dual: red.dual.clone(),
        record: record.summary(),
    };
    Ok(outcome(&res, Vec::new(), Verdict::Ok))
}
