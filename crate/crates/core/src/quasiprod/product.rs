//! `Lambda_1 x Gamma_2` with `Gamma_2 = (1/beta) Z`, chosen by a completeness sweep.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::QuasiProductForm;
use crate::config::{SweepConfig, JP_STALL};
use crate::error::{Error, Result};
use crate::intlat::RatVec;
use crate::measure::FourierEval;

/// Terms with `|mu_hat|` at or below this are left out of the sweep, so sums are lower bounds.
pub const SWEEP_DROP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Accepted,
    Insufficient,
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaTrial {
    pub beta: i64,
    pub min_q: f64,
    pub status: TrialStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSpectrum {
    pub beta: i64,
    pub min_q: f64,
    pub trials: Vec<BetaTrial>,
    /// Base points used in the sweep.
    pub base_points: usize,
    /// Fiber points `t / beta` with `|t / beta| <= fiber_radius`.
    pub fiber_points: usize,
}

/// The `xi` grid `{0, 1/g, .., (g-1)/g}^d`.
pub fn sweep_grid(d: usize, g: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out.into_iter().flat_map(|p: Vec<f64>| (0..g).map(move |i| [p.clone(), vec![i as f64 / g as f64]].concat())).collect();
    }
    out
}

fn fiber(beta: i64, radius: f64) -> Vec<i64> {
    let tmax = (radius * beta as f64).floor() as i64;
    let mut ts: Vec<i64> = (-tmax..=tmax).collect();
    ts.sort_by_key(|t| (t.abs(), *t < 0));
    ts
}

/// `min_xi sum_{lambda1, t} |mu_hat(xi + (lambda1, t/beta))|^2` over the sweep grid.
pub fn sweep_product(eval: &FourierEval, base: &[Vec<f64>], beta: i64, cfg: &SweepConfig) -> f64 {
    let d = eval.pair().dim();
    let ts = fiber(beta, cfg.fiber_radius);
    sweep_grid(d, cfg.grid)
        .iter()
        .map(|xi| {
            base.par_iter()
                .map(|l1| {
                    let mut y = xi.clone();
                    let mut s = 0.0;
                    for &t in &ts {
                        for (i, v) in l1.iter().enumerate() {
                            y[i] = xi[i] + v;
                        }
                        y[d - 1] = xi[d - 1] + t as f64 / beta as f64;
                        if let Some(a) = eval.abs_above(&y, SWEEP_DROP) {
                            s += a * a;
                        }
                    }
                    s
                })
                .collect::<Vec<f64>>()
                .iter()
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Tries `beta = |det Q| t` for `t = 1, 2, 3` and keeps the first that passes the sweep.
///
/// `eval` is the conjugated measure; `base` holds spectrum points of the first block.
pub fn product_spectrum(form: &QuasiProductForm, eval: &FourierEval, base: &[RatVec], cfg: &SweepConfig) -> Result<ProductSpectrum> {
    if form.r2.dim() != 1 {
        return Err(Error::Unsupported(format!("product spectrum with a {}-dimensional fiber", form.r2.dim())));
    }
    let detq = form.det_q()? as i64;
    let base: Vec<Vec<f64>> = base.iter().take(cfg.budget).map(|p| p.to_f64()).collect();
    let mut trials = Vec::new();
    let mut best_min = f64::NEG_INFINITY;
    for t in 1..=3 {
        let beta = detq * t;
        let min_q = sweep_product(eval, &base, beta, cfg);
        best_min = best_min.max(min_q);
        let status = if min_q >= cfg.accept {
            TrialStatus::Accepted
        } else if min_q < JP_STALL {
            TrialStatus::Stalled
        } else {
            TrialStatus::Insufficient
        };
        tracing::debug!(beta, min_q, ?status, "beta trial");
        trials.push(BetaTrial { beta, min_q, status });
        if status == TrialStatus::Accepted {
            return Ok(ProductSpectrum { beta, min_q, trials, base_points: base.len(), fiber_points: fiber(beta, cfg.fiber_radius).len() });
        }
    }
    Err(Error::NoBetaAccepted { best_min })
}

/// `base x (1/beta) Z` within the fiber radius, base-major.
pub fn product_points(base: &[RatVec], beta: i64, radius: f64) -> Vec<RatVec> {
    let ts = fiber(beta, radius);
    let mut out = Vec::with_capacity(base.len() * ts.len());
    for b in base {
        for &t in &ts {
            let mut v = b.0.clone();
            v.push(BigRational::new(BigInt::from(t), BigInt::from(beta)));
            out.push(RatVec(v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::triangular;
    use crate::intlat::IntMatrix;
    use crate::quasiprod::{decompose, triangularize};
    use crate::triples::AffinePair;
    use crate::zeroset::Grade;

    fn integers(n: i64) -> Vec<RatVec> {
        let mut v: Vec<i64> = (-n..=n).collect();
        v.sort_by_key(|x| x.abs());
        v.into_iter().map(|x| RatVec::integer(&[x])).collect()
    }

    #[test]
    fn grid_and_fiber() {
        assert_eq!(sweep_grid(2, 2), vec![vec![0.0, 0.0], vec![0.0, 0.5], vec![0.5, 0.0], vec![0.5, 0.5]]);
        assert_eq!(fiber(3, 1.0), vec![0, 1, -1, 2, -2, 3, -3]);
        assert_eq!(product_points(&[RatVec::integer(&[2])], 3, 0.5)[2], RatVec(vec![BigRational::from_integer(2.into()), BigRational::new((-1).into(), 3.into())]));
    }

    #[test]
    fn rectangle_gets_a_third_lattice() {
        let r = IntMatrix::diag(&[2, 2]);
        let b = vec![vec![0, 0], vec![0, 3], vec![1, 0], vec![1, 3]];
        let tri = triangularize(&r, &[vec![1, 0]]).unwrap();
        let form = decompose(&tri, &b, &RatVec::from_ints(&[1], 3), 2, Grade::Exact).unwrap();
        let eval = FourierEval::new(&AffinePair::new(r, b).unwrap());
        let cfg = SweepConfig { budget: 101, ..SweepConfig::default() };
        let p = product_spectrum(&form, &eval, &integers(50), &cfg).unwrap();
        assert_eq!(p.beta, 3);
        assert!(p.min_q >= 0.95 && p.min_q <= 1.0 + 1e-9, "{}", p.min_q);
    }

    #[test]
    fn integer_fiber_stalls_on_triangular() {
        let t = triangular();
        let eval = FourierEval::new(&t.pair);
        // Base spectrum of (4, {0,1}): sums of {0,2} 4^k.
        let mut base = vec![0i64];
        for k in 0..6 {
            base = base.iter().flat_map(|&x| [x, x + 2 * 4i64.pow(k)]).collect();
        }
        let base: Vec<Vec<f64>> = base.iter().map(|&x| vec![x as f64]).collect();
        let cfg = SweepConfig::default();
        let q1 = sweep_product(&eval, &base, 1, &cfg);
        assert!(q1 < JP_STALL, "{q1}");
        let q3 = sweep_product(&eval, &base, 3, &cfg);
        assert!(q3 >= 0.95, "{q3}");
    }
}
