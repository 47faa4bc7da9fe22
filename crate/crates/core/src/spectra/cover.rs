//! Grid cover of the dual attractor with one integer shift per cell.
//!
//! Every grid point `g` gets a shift `k_g` and a value `v_g = |mu_hat(g + k_g)|`.
//! Any `x` within half a step of `g` and any `|y|_inf < eps0` then satisfy
//! `|mu_hat(x + y + k_g)| >= v_g - L (step/2 + eps0)`, with `L` the Lipschitz bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{CoverConfig, COVER_ACCEPT_RATIO};
use crate::error::{Error, Result};
use crate::intlat::IVec;
use crate::measure::{attractor_box, lipschitz_bound, FourierEval};
use crate::triples::AffinePair;
use crate::zeroset::window_shifts;

/// A shift is accepted without scanning the rest of the window once `|mu_hat|` reaches this.
const GOOD_ENOUGH: f64 = 0.5;

/// Absorbs rounding in the evaluation of `mu_hat`.
const EVAL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverCertificate {
    pub eps0: f64,
    pub delta0: f64,
    pub step: f64,
    pub points: usize,
    pub lipschitz: f64,
    pub window: i64,
}

#[derive(Debug, Clone)]
pub struct Cover {
    pub cert: CoverCertificate,
    lo: Vec<f64>,
    counts: Vec<usize>,
    shifts: Vec<IVec>,
}

impl Cover {
    fn index(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        for ((v, lo), &n) in x.iter().zip(&self.lo).zip(&self.counts) {
            let i = ((v - lo) / self.cert.step).round().clamp(0.0, (n - 1) as f64) as usize;
            idx = idx * n + i;
        }
        idx
    }

    /// The shift `k_x` of the cell containing `x`.
    pub fn shift_for(&self, x: &[f64]) -> IVec {
        self.shifts[self.index(x)].clone()
    }
}

fn grid_point(lo: &[f64], counts: &[usize], step: f64, mut idx: usize) -> Vec<f64> {
    let mut g = vec![0.0; lo.len()];
    for i in (0..lo.len()).rev() {
        g[i] = lo[i] + (idx % counts[i]) as f64 * step;
        idx /= counts[i];
    }
    g
}

/// Halves `eps0` from `cfg.eps_start` until `delta0` is a fair share of what the grid allows,
/// stops improving, or the grid gets too large.
pub fn build_cover(eval: &FourierEval, dual: &AffinePair, cfg: &CoverConfig) -> Result<Cover> {
    let bx = attractor_box(dual);
    let lip = lipschitz_bound(eval.pair());
    let shifts = window_shifts(bx.lo.len(), cfg.window);
    let mut best: Option<Cover> = None;
    let mut worst_point = bx.lo.clone();
    let mut eps = cfg.eps_start;
    while eps >= cfg.eps_min {
        let step = eps / 2.0;
        let counts: Vec<usize> = bx.width().iter().map(|w| (w / step).ceil() as usize + 1).collect();
        let total = counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c)).unwrap_or(usize::MAX);
        if total > cfg.max_points {
            break;
        }
        let cells: Vec<(IVec, f64)> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let g = grid_point(&bx.lo, &counts, step, idx);
                let mut top = (shifts[0].clone(), -1.0);
                for k in &shifts {
                    let y: Vec<f64> = g.iter().zip(k).map(|(a, &b)| a + b as f64).collect();
                    let v = eval.mu_hat(&y).norm();
                    if v > top.1 {
                        top = (k.clone(), v);
                    }
                    if v >= GOOD_ENOUGH {
                        break;
                    }
                }
                top
            })
            .collect();
        let radius = step / 2.0 + eps;
        let (widx, wval) = cells.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, c)| if c.1 < acc.1 { (i, c.1) } else { acc });
        worst_point = grid_point(&bx.lo, &counts, step, widx);
        // The origin keeps k = 0, where mu_hat(0) = 1.
        let margin = (wval - lip * radius).min(1.0 - lip * eps) - EVAL_SLACK;
        let delta0 = if margin > 0.0 { margin * margin } else { 0.0 };
        let prev = best.as_ref().map_or(0.0, |c| c.cert.delta0);
        if delta0 > prev {
            let cert = CoverCertificate { eps0: eps, delta0, step, points: total, lipschitz: lip, window: cfg.window };
            best = Some(Cover { cert, lo: bx.lo.clone(), counts, shifts: cells.into_iter().map(|c| c.0).collect() });
            if delta0 >= COVER_ACCEPT_RATIO * wval * wval {
                break;
            }
        } else if prev > 0.0 {
            break;
        }
        eps /= 2.0;
    }
    best.ok_or(Error::NoShiftFound { x: worst_point })
}
