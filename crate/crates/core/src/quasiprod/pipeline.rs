//! Induction on the dimension: reduce, split on the zero set, recurse on the first block.

use std::collections::HashSet;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::product::{product_points, product_spectrum, sweep_grid, ProductSpectrum};
use super::{check_subtriples, decompose, fiber_dual, map_all, normalize_l, triangularize, QuasiProductForm, SubTripleCheck, Triangularization};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::intlat::reduce::ConjugationSummary;
use crate::intlat::{reduce_to_full, ConjugationRecord, IVec, IntMatrix, RatVec};
use crate::measure::FourierEval;
use crate::spectra::{build_corrected, SpectrumTree};
use crate::triples::{AffinePair, HadamardTriple};
use crate::zeroset::{analyze, find_invariant_cycle, Grade, InvariantCycle, ZeroSetStatus};

/// Base points and fiber half-width (in multiples of `1/beta`) of the orthogonality box.
const CHECK_BASE: usize = 16;
const CHECK_FIBER: i64 = 2;
/// Points of an empty-zero-set sample used for the orthogonality check.
const CHECK_POINTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Branch {
    /// The zero set is empty and a corrected tree gives the spectrum.
    EmptyZeroSet { method: String, tree: SpectrumTree, tree_depth: usize },
    /// The zero set is non-empty; the spectrum is a product over a lower-dimensional base.
    QuasiProduct {
        cycle: InvariantCycle,
        form: QuasiProductForm,
        subtriples: SubTripleCheck,
        base: Box<SpectrumReport>,
        product: ProductSpectrum,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub dim: usize,
    pub reduced_dim: usize,
    pub reduction: ConjugationSummary,
    pub branch: Branch,
    pub sample_size: usize,
    /// Spectrum points in the input coordinates.
    #[serde(skip)]
    pub sample: Vec<RatVec>,
    /// Largest `|mu_hat(lambda - lambda')|` over the check box.
    pub orthogonality: f64,
    pub check_points: usize,
    /// Smallest completeness sum over the sweep grid.
    pub jp_min: f64,
    pub grade: Grade,
}

impl SpectrumReport {
    /// Number of nested quasi-product steps.
    pub fn depth(&self) -> usize {
        match &self.branch {
            Branch::EmptyZeroSet { .. } => 0,
            Branch::QuasiProduct { base, .. } => 1 + base.depth(),
        }
    }
}

fn pull_back(record: &ConjugationRecord, dim: usize, points: &[RatVec]) -> Vec<RatVec> {
    points
        .par_iter()
        .map(|p| {
            let mut v = p.0.clone();
            v.resize(dim, BigRational::zero());
            RatVec(record.pull_back_frequency(&v))
        })
        .collect()
}

/// `max |mu_hat(a - b)|` over distinct pairs, evaluated at exact rational differences.
pub fn rational_cross_term(eval: &FourierEval, points: &[RatVec]) -> f64 {
    let mut diffs = HashSet::new();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = a.sub(b);
            let neg = RatVec(d.0.iter().map(|x| -x).collect());
            diffs.insert(if d > neg { d } else { neg });
        }
    }
    let diffs: Vec<RatVec> = diffs.into_iter().collect();
    diffs.par_iter().map(|d| eval.mu_hat_rational(&d.0).norm()).reduce(|| 0.0, f64::max)
}

fn jp_min(eval: &FourierEval, points: &[RatVec], grid: usize) -> f64 {
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.to_f64()).collect();
    sweep_grid(eval.pair().dim(), grid)
        .iter()
        .map(|xi| {
            pts.par_iter()
                .map(|p| {
                    let y: Vec<f64> = xi.iter().zip(p).map(|(a, b)| a + b).collect();
                    eval.mu_hat(&y).norm_sqr()
                })
                .collect::<Vec<f64>>()
                .iter()
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

struct Reduced {
    branch: Branch,
    sample: Vec<RatVec>,
    check: Vec<RatVec>,
    jp_min: f64,
    grade: Grade,
}

/// Spectrum of a Hadamard triple by induction on the dimension.
pub fn full_spectrum(triple: &HadamardTriple, cfg: &PipelineConfig) -> Result<SpectrumReport> {
    let d = triple.dim();
    let red = reduce_to_full(triple.r(), triple.b(), Some(&triple.l))?;
    let dual = red.dual.clone().ok_or(Error::Inconsistent("reduction lost the dual digits".into()))?;
    let reduced = HadamardTriple::new(AffinePair::new(red.r.clone(), red.digits.clone())?, dual)?;
    tracing::info!(dim = d, reduced_dim = red.reduced_dim, "spectrum pipeline level");
    let inner = reduced_spectrum(&reduced, cfg)?;
    let sample = pull_back(&red.record, d, &inner.sample);
    let check = pull_back(&red.record, d, &inner.check);
    let orthogonality = rational_cross_term(&FourierEval::new(&triple.pair), &check);
    Ok(SpectrumReport {
        dim: d,
        reduced_dim: red.reduced_dim,
        reduction: red.record.summary(),
        branch: inner.branch,
        sample_size: sample.len(),
        sample,
        orthogonality,
        check_points: check.len(),
        jp_min: inner.jp_min,
        grade: inner.grade,
    })
}

fn reduced_spectrum(triple: &HadamardTriple, cfg: &PipelineConfig) -> Result<Reduced> {
    let eval = FourierEval::new(&triple.pair);
    let analysis = analyze(&eval, &cfg.zero);
    match analysis.status {
        ZeroSetStatus::Undecided => Err(Error::Undecided("periodic zero set could not be decided".into())),
        ZeroSetStatus::Empty { method } => empty_branch(triple, &eval, method, cfg),
        ZeroSetStatus::NonEmpty { witness } => {
            tracing::info!(witness = %witness, "zero set is non-empty");
            quasi_branch(triple, &eval, cfg)
        }
    }
}

fn empty_branch(triple: &HadamardTriple, eval: &FourierEval, method: String, cfg: &PipelineConfig) -> Result<Reduced> {
    let mut last = None;
    for depth in (1..=cfg.depth.max(1)).rev() {
        match build_corrected(triple, eval, depth, &cfg.cover) {
            Ok(tree) => {
                let k = (1..=tree.depth()).rev().find(|&k| tree.size(k) <= cfg.sweep.budget as u128).unwrap_or(1);
                let sample: Vec<RatVec> = tree.lambda(k, cfg.cover.cap)?.iter().map(|v| RatVec::integer(v)).collect();
                let check = sample.iter().take(CHECK_POINTS).cloned().collect();
                let jp = jp_min(eval, &sample, cfg.sweep.grid);
                let grade = Grade::Exact;
                return Ok(Reduced { branch: Branch::EmptyZeroSet { method, tree, tree_depth: k }, sample, check, jp_min: jp, grade });
            }
            Err(e @ Error::CapExceeded { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or(Error::Undecided("no tree level fits the cap".into())))
}

struct QuasiParts {
    cycle: InvariantCycle,
    tri: Triangularization,
    b_t: Vec<IVec>,
    l_t: Vec<IVec>,
    form: QuasiProductForm,
    subtriples: SubTripleCheck,
}

fn quasi_parts(triple: &HadamardTriple, eval: &FourierEval, cfg: &PipelineConfig) -> Result<QuasiParts> {
    let cycle = find_invariant_cycle(eval, &cfg.zero)?;
    if cycle.subspace.is_empty() {
        return Err(Error::Undecided("no rational invariant subspace was certified for the cycle".into()));
    }
    let tri = triangularize(triple.r(), &cycle.subspace)?;
    let rank = tri.rank;
    let b_t = map_all(&tri.m()?, triple.b())?;
    let l_t = normalize_l(&tri.r_tilde, &b_t, &map_all(&tri.m_inv_t()?, &triple.l)?, rank)?;
    let x0_t = tri.record.m_inv.transpose().mul_vec(&cycle.x0.0);
    let y0 = RatVec(x0_t[rank..].to_vec());
    let form = decompose(&tri, &b_t, &y0, cycle.period, cycle.grade)?;
    let subtriples = check_subtriples(&tri, &b_t, &l_t)?;
    Ok(QuasiParts { cycle, tri, b_t, l_t, form, subtriples })
}

fn quasi_branch(triple: &HadamardTriple, eval: &FourierEval, cfg: &PipelineConfig) -> Result<Reduced> {
    let d = triple.dim();
    let QuasiParts { cycle, tri, b_t, l_t, form, subtriples } = quasi_parts(triple, eval, cfg)?;
    let rank = tri.rank;
    if !subtriples.all_valid() {
        return Err(Error::Inconsistent("a sub-triple of the decomposition is not a Hadamard triple".into()));
    }
    if d - rank != 1 {
        return Err(Error::Unsupported(format!("fiber of dimension {}", d - rank)));
    }
    let l2 = l_t[0][rank..].to_vec();
    let sub = HadamardTriple::new(AffinePair::new(tri.r1.clone(), form.pi1())?, fiber_dual(&l_t, rank, &l2))?;
    tracing::info!(rank, "recursing on the first block");
    let base = full_spectrum(&sub, cfg)?;
    let eval_t = FourierEval::new(&AffinePair::new(tri.r_tilde.clone(), b_t)?);
    let product = product_spectrum(&form, &eval_t, &base.sample, &cfg.sweep)?;
    let used: Vec<RatVec> = base.sample.iter().take(cfg.sweep.budget).cloned().collect();
    let points = product_points(&used, product.beta, cfg.sweep.fiber_radius);
    let check_base: Vec<RatVec> = used.iter().take(CHECK_BASE).cloned().collect();
    let check = product_points(&check_base, product.beta, CHECK_FIBER as f64);
    let sample = pull_back(&tri.record, d, &points);
    let check = pull_back(&tri.record, d, &check);
    let grade = cycle.grade.and(base.grade);
    let jp = product.min_q;
    Ok(Reduced { branch: Branch::QuasiProduct { cycle, form, subtriples, base: Box::new(base), product }, sample, check, jp_min: jp, grade })
}

/// The quasi-product structure of a triple, without building a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiProductAnalysis {
    pub dim: usize,
    pub reduced_dim: usize,
    pub reduction: ConjugationSummary,
    /// The reduced pair on which the zero set and the cycle are computed.
    pub reduced_r: IntMatrix,
    pub reduced_b: Vec<IVec>,
    pub zero_set: ZeroSetStatus,
    pub cycle: Option<InvariantCycle>,
    pub form: Option<QuasiProductForm>,
    pub subtriples: Option<SubTripleCheck>,
}

/// Reduces, decides the zero set and, when it is non-empty, finds the quasi-product form.
pub fn quasi_product(triple: &HadamardTriple, cfg: &PipelineConfig) -> Result<QuasiProductAnalysis> {
    let red = reduce_to_full(triple.r(), triple.b(), Some(&triple.l))?;
    let dual = red.dual.clone().ok_or(Error::Inconsistent("reduction lost the dual digits".into()))?;
    let reduced = HadamardTriple::new(AffinePair::new(red.r.clone(), red.digits.clone())?, dual)?;
    let eval = FourierEval::new(&reduced.pair);
    let zero_set = analyze(&eval, &cfg.zero).status;
    let (cycle, form, subtriples) = match zero_set {
        ZeroSetStatus::Undecided => return Err(Error::Undecided("periodic zero set could not be decided".into())),
        ZeroSetStatus::Empty { .. } => (None, None, None),
        ZeroSetStatus::NonEmpty { .. } => {
            let parts = quasi_parts(&reduced, &eval, cfg)?;
            (Some(parts.cycle), Some(parts.form), Some(parts.subtriples))
        }
    };
    Ok(QuasiProductAnalysis {
        dim: triple.dim(),
        reduced_dim: red.reduced_dim,
        reduction: red.record.summary(),
        reduced_r: red.r,
        reduced_b: red.digits,
        zero_set,
        cycle,
        form,
        subtriples,
    })
}
