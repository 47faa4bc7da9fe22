//! Fourier transform, discrete approximants and geometry of `mu(R,B)`.

mod render;

use std::f64::consts::PI;
use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::config::{MU_HAT_ETA, MU_HAT_MAX_DEPTH, TOWER_CAP};
use crate::error::{Error, Result};
use crate::intlat::mat::ratio_to_f64;
use crate::intlat::{Mat, QMat};
use crate::triples::{digit_tower, mask_eval, mask_of, AffinePair};

pub use render::{render_attractor, render_field, render_mu_hat, Raster};

/// When to stop expanding the infinite product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthPolicy {
    pub max_depth: usize,
    /// Stop once `||(R^T)^{-j} xi||_inf < eta`; the remaining factors are taken as 1.
    pub eta: f64,
}

impl Default for DepthPolicy {
    fn default() -> Self {
        Self { max_depth: MU_HAT_MAX_DEPTH, eta: MU_HAT_ETA }
    }
}

/// Evaluator of `mu_hat(xi) = prod_{j >= 1} M_B((R^T)^{-j} xi)`.
#[derive(Debug, Clone)]
pub struct FourierEval {
    pair: AffinePair,
    policy: DepthPolicy,
    inv_t: QMat,
    /// `(R^T)^{-j}` for `j = 1..=max_depth`.
    pows: Vec<Mat<f64>>,
    sup_norm: f64,
}

impl FourierEval {
    pub fn new(pair: &AffinePair) -> Self {
        Self::with_policy(pair, DepthPolicy::default())
    }

    pub fn with_policy(pair: &AffinePair, policy: DepthPolicy) -> Self {
        let inv_t = pair.r().transpose().inverse().expect("expansive matrix is invertible");
        let mut pows = Vec::with_capacity(policy.max_depth);
        let mut cur = inv_t.clone();
        for _ in 0..policy.max_depth {
            pows.push(cur.to_f64());
            cur = cur.mul(&inv_t);
        }
        let sup_norm = pows.iter().map(|m| m.norm_inf()).fold(1.0, f64::max);
        Self { pair: pair.clone(), policy, inv_t, pows, sup_norm }
    }

    pub fn pair(&self) -> &AffinePair {
        &self.pair
    }

    pub fn policy(&self) -> DepthPolicy {
        self.policy
    }

    /// Exact `(R^T)^{-1}`.
    pub fn inv_t(&self) -> &QMat {
        &self.inv_t
    }

    /// `sup_{p >= 0} ||(R^T)^{-p}||_inf` over the cached powers.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// `(R^T)^{-j} xi`; `j = 0` is the identity.
    pub fn contract(&self, xi: &[f64], j: usize) -> Vec<f64> {
        match j {
            0 => xi.to_vec(),
            j if j <= self.pows.len() => self.pows[j - 1].apply(xi),
            j => {
                let mut y = self.pows[self.pows.len() - 1].apply(xi);
                for _ in self.pows.len()..j {
                    y = self.pows[0].apply(&y);
                }
                y
            }
        }
    }

    /// Number of factors the policy uses at `xi`.
    pub fn depth(&self, xi: &[f64]) -> usize {
        for j in 1..=self.policy.max_depth {
            if norm_inf(&self.contract(xi, j)) < self.policy.eta {
                return j - 1;
            }
        }
        self.policy.max_depth
    }

    pub fn mu_hat(&self, xi: &[f64]) -> Complex64 {
        let mut prod = Complex64::new(1.0, 0.0);
        let mut y = vec![0.0; xi.len()];
        for j in 1..=self.policy.max_depth {
            self.pows[j - 1].apply_into(xi, &mut y);
            if norm_inf(&y) < self.policy.eta {
                break;
            }
            prod *= mask_eval(&self.pair, &y);
            if prod.norm_sqr() == 0.0 {
                break;
            }
        }
        prod
    }

    /// `|mu_hat(xi)|` when it exceeds `t`, else `None`.
    ///
    /// Every factor has modulus at most 1, so the product stops as soon as it drops to `t`.
    pub fn abs_above(&self, xi: &[f64], t: f64) -> Option<f64> {
        let mut prod = Complex64::new(1.0, 0.0);
        let mut y = vec![0.0; xi.len()];
        for j in 1..=self.policy.max_depth {
            self.pows[j - 1].apply_into(xi, &mut y);
            if norm_inf(&y) < self.policy.eta {
                break;
            }
            prod *= mask_eval(&self.pair, &y);
            if prod.norm() <= t {
                return None;
            }
        }
        Some(prod.norm())
    }

    /// Exactly `t` factors of the product.
    pub fn mu_hat_truncated(&self, xi: &[f64], t: usize) -> Complex64 {
        let mut prod = Complex64::new(1.0, 0.0);
        let mut y = xi.to_vec();
        for j in 1..=t {
            y = if j <= self.pows.len() { self.pows[j - 1].apply(xi) } else { self.pows[0].apply(&y) };
            prod *= mask_eval(&self.pair, &y);
        }
        prod
    }

    /// `mu_hat` at a rational point, with exact phases while denominators stay small.
    pub fn mu_hat_rational(&self, xi: &[BigRational]) -> Complex64 {
        let mut prod = Complex64::new(1.0, 0.0);
        let mut y = xi.to_vec();
        for j in 1..=self.policy.max_depth {
            y = self.inv_t.mul_vec(&y);
            let yf: Vec<f64> = y.iter().map(ratio_to_f64).collect();
            if norm_inf(&yf) < 1e-3 || y.iter().any(|v| v.denom().bits() > 512) {
                let rest = self.mu_hat_from(&yf, j);
                return prod * rest;
            }
            let mut acc = Complex64::zero();
            for b in self.pair.digits() {
                let t: BigRational = b.iter().zip(&y).map(|(&bi, yi)| yi * BigInt::from(bi)).sum();
                acc += Complex64::cis(-2.0 * PI * frac_of(&t));
            }
            prod *= acc / self.pair.n() as f64;
        }
        prod
    }

    /// Product of the factors from level `j0` on, given `y = (R^T)^{-j0} xi`.
    fn mu_hat_from(&self, y: &[f64], j0: usize) -> Complex64 {
        let mut prod = mask_eval(&self.pair, y);
        let mut cur = y.to_vec();
        for _ in j0..self.policy.max_depth {
            cur = self.pows[0].apply(&cur);
            if norm_inf(&cur) < self.policy.eta {
                break;
            }
            prod *= mask_eval(&self.pair, &cur);
        }
        prod
    }
}

/// Fractional part of a rational in `[0, 1)`.
pub fn frac_of(t: &BigRational) -> f64 {
    let r = t.numer().mod_floor(t.denom());
    ratio_to_f64(&BigRational::new(r, t.denom().clone()))
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `|mu_hat(xi) - M_{B_n}((R^T)^{-n} xi) mu_hat((R^T)^{-n} xi)|`, both sides with the same total depth.
pub fn refinement_identity_defect(eval: &FourierEval, xi: &[f64], n: usize) -> Result<f64> {
    let t = eval.depth(xi).max(n);
    let lhs = eval.mu_hat_truncated(xi, t);
    let bn = digit_tower(eval.pair().r(), eval.pair().digits(), n)?;
    let y = eval.contract(xi, n);
    let rhs = mask_of(&bn, &y) * eval.mu_hat_truncated(&y, t - n);
    Ok((lhs - rhs).norm())
}

/// Finitely supported probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// `sum_x w_x exp(-2 pi i <x, xi>)`.
    pub fn fourier(&self, xi: &[f64]) -> Complex64 {
        self.points
            .par_iter()
            .zip(&self.weights)
            .map(|(x, &w)| {
                let t: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
                Complex64::cis(-2.0 * PI * t) * w
            })
            .collect::<Vec<_>>()
            .iter()
            .sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// CSV with columns `x0.., weight`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let d = self.points.first().map_or(0, |p| p.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
        header.push("weight".into());
        w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
        for (p, wt) in self.points.iter().zip(&self.weights) {
            let mut rec: Vec<String> = p.iter().map(|x| format!("{x:.16e}")).collect();
            rec.push(format!("{wt:.16e}"));
            w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `mu_n`: atoms `R^{-n} b` for `b` in `B_n`, each of weight `N^{-n}`.
pub fn discrete_approximant(pair: &AffinePair, n: usize) -> Result<DiscreteMeasure> {
    let count = (pair.n() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > TOWER_CAP {
        return Err(Error::CapExceeded { what: "discrete approximant", requested: count, cap: TOWER_CAP });
    }
    let bn = digit_tower(pair.r(), pair.digits(), n)?;
    let inv_n = pair.r().inverse()?.pow(n as u32).to_f64();
    let w = 1.0 / count as f64;
    let points: Vec<Vec<f64>> = bn.par_iter().map(|b| inv_n.apply(&b.iter().map(|&x| x as f64).collect::<Vec<_>>())).collect();
    Ok(DiscreteMeasure { weights: vec![w; points.len()], points })
}

/// Axis-aligned box containing the attractor `T(R,B)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AttractorBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AttractorBox {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| v >= l && v <= h)
    }

    pub fn width(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).collect()
    }
}

/// Sums coordinatewise extremes of `R^{-k} B` until the terms are negligible, then pads.
pub fn attractor_box(pair: &AffinePair) -> AttractorBox {
    let d = pair.dim();
    let inv = pair.r().inverse().expect("expansive matrix").to_f64();
    let maxb = pair.digits().iter().map(|b| norm_inf(&b.iter().map(|&x| x as f64).collect::<Vec<_>>())).fold(0.0, f64::max);
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    let mut pow = inv.clone();
    let mut tail = 0.0;
    for _ in 0..4096 {
        let imgs: Vec<Vec<f64>> = pair.digits().iter().map(|b| pow.apply(&b.iter().map(|&x| x as f64).collect::<Vec<_>>())).collect();
        for i in 0..d {
            lo[i] += imgs.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min);
            hi[i] += imgs.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max);
        }
        tail = pow.norm_inf() * maxb;
        if tail < 1e-20 {
            break;
        }
        pow = pow.matmul(&inv);
    }
    let pad = 1e-12 * hi.iter().zip(&lo).map(|(h, l)| h - l).fold(1.0, f64::max) + tail;
    AttractorBox { lo: lo.iter().map(|x| x - pad).collect(), hi: hi.iter().map(|x| x + pad).collect() }
}

/// Lipschitz constant of `mu_hat` for the max-norm: `2 pi max_{t in T(R,B)} |t|_1`.
pub fn lipschitz_bound(pair: &AffinePair) -> f64 {
    let bx = attractor_box(pair);
    2.0 * PI * bx.lo.iter().zip(&bx.hi).map(|(l, h)| l.abs().max(h.abs())).sum::<f64>()
}

/// Energy and Fourier coefficient of a level-`n` step function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMoment {
    /// `int |f|^2 dmu = N^{-n} sum |w_b|^2`.
    pub norm_sq: f64,
    /// `int f(x) exp(-2 pi i <x, xi>) dmu(x)`.
    pub transform: Complex64,
}

/// Moments of `f = sum_{b in B_n} w_b 1_{tau_b(T)}`; `w` is indexed like [`digit_tower`].
///
/// Refuses non-simple digit sets, where the cells may overlap.
pub fn step_moment(eval: &FourierEval, n: usize, w: &[Complex64], xi: &[f64]) -> Result<StepMoment> {
    let pair = eval.pair();
    let rs = crate::intlat::ResidueSystem::new(pair.r())?;
    if let Some((a, b)) = rs.collision(pair.digits()) {
        return Err(Error::NotSimple(a, b));
    }
    let bn = digit_tower(pair.r(), pair.digits(), n)?;
    if w.len() != bn.len() {
        return Err(Error::DimensionMismatch(format!("{} coefficients for {} cells", w.len(), bn.len())));
    }
    let scale = 1.0 / bn.len() as f64;
    let norm_sq = w.iter().map(|c| c.norm_sqr()).sum::<f64>() * scale;
    let inv_n = pair.r().inverse()?.pow(n as u32).to_f64();
    let sum: Complex64 = bn
        .iter()
        .zip(w)
        .map(|(b, &c)| {
            let x = inv_n.apply(&b.iter().map(|&v| v as f64).collect::<Vec<_>>());
            let t: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
            c * Complex64::cis(-2.0 * PI * t)
        })
        .sum();
    let transform = sum * eval.mu_hat(&eval.contract(xi, n)) * scale;
    Ok(StepMoment { norm_sq, transform })
}

/// Rational vector from integers over a common denominator.
pub fn rational_point(num: &[i64], den: i64) -> Vec<BigRational> {
    num.iter().map(|&x| BigRational::new(BigInt::from(x), BigInt::from(den))).collect()
}

/// `|mu_hat(-xi) - conj(mu_hat(xi))|`.
pub fn conj_symmetry_defect(eval: &FourierEval, xi: &[f64]) -> f64 {
    let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
    (eval.mu_hat(&neg) - eval.mu_hat(xi).conj()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basic_values() {
        let ev = FourierEval::new(&catalog::quarter_cantor().pair);
        assert!((ev.mu_hat(&[0.0]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(ev.mu_hat(&[1.0]).norm() < 1e-15);
    }

    #[test]
    fn agrees_with_twenty_level_approximant() {
        let pair = catalog::quarter_cantor().pair;
        let ev = FourierEval::new(&pair);
        let mu = discrete_approximant(&pair, 20).unwrap();
        let tail: Complex64 = (21..=ev.depth(&[0.3]).max(21)).map(|j| mask_eval(&pair, &ev.contract(&[0.3], j))).product();
        assert!((ev.mu_hat(&[0.3]) - mu.fourier(&[0.3]) * tail).norm() < 1e-6);
        assert!((ev.mu_hat_truncated(&[0.3], 20) - mu.fourier(&[0.3])).norm() < 1e-9);
    }

    #[test]
    fn rational_evaluation_matches_float() {
        let ev = FourierEval::new(&catalog::triangular().pair);
        for (a, b, den) in [(1, 2, 3), (7, -5, 8), (0, 1, 3)] {
            let exact = ev.mu_hat_rational(&rational_point(&[a, b], den));
            let float = ev.mu_hat(&[a as f64 / den as f64, b as f64 / den as f64]);
            assert!((exact - float).norm() < 1e-12);
        }
    }

    #[test]
    fn refinement_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let jp = FourierEval::new(&catalog::quarter_cantor().pair);
        assert!(refinement_identity_defect(&jp, &[0.0], 3).unwrap() < 1e-15);
        for _ in 0..50 {
            let xi = rng.gen_range(-4.0..4.0);
            assert!(refinement_identity_defect(&jp, &[xi], 3).unwrap() < 1e-9);
        }
        let tri = FourierEval::new(&catalog::triangular().pair);
        for _ in 0..20 {
            let xi = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
            assert!(refinement_identity_defect(&tri, &xi, 2).unwrap() < 1e-9);
        }
    }

    #[test]
    fn approximant_atoms() {
        let jp = catalog::quarter_cantor().pair;
        let m1 = discrete_approximant(&jp, 1).unwrap();
        assert_eq!(m1.points, vec![vec![0.0], vec![0.5]]);
        assert_eq!(m1.weights, vec![0.5, 0.5]);
        let mut m2: Vec<f64> = discrete_approximant(&jp, 2).unwrap().points.into_iter().map(|p| p[0]).collect();
        m2.sort_by(f64::total_cmp);
        assert_eq!(m2, vec![0.0, 0.125, 0.5, 0.625]);
        let mut c2: Vec<f64> = discrete_approximant(&catalog::middle_third(), 2).unwrap().points.into_iter().map(|p| p[0]).collect();
        c2.sort_by(f64::total_cmp);
        for (a, b) in c2.iter().zip([0.0, 2.0 / 9.0, 2.0 / 3.0, 8.0 / 9.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn boxes() {
        let b = attractor_box(&catalog::lebesgue(2).pair);
        assert!(b.lo[0].abs() < 1e-9 && (b.hi[0] - 1.0).abs() < 1e-9);
        let b = attractor_box(&catalog::stretched_interval());
        assert!(b.lo[0].abs() < 1e-9 && (b.hi[0] - 2.0).abs() < 1e-9);
        let b = attractor_box(&catalog::quarter_cantor().pair);
        assert!(b.lo[0] <= 0.0 && b.hi[0] >= 2.0 / 3.0 && b.hi[0] < 2.0 / 3.0 + 1e-9);
    }

    #[test]
    fn step_moments() {
        let jp = FourierEval::new(&catalog::quarter_cantor().pair);
        let one = vec![Complex64::new(1.0, 0.0); 4];
        let m = step_moment(&jp, 2, &one, &[0.0]).unwrap();
        assert!((m.norm_sq - 1.0).abs() < 1e-15 && (m.transform - 1.0).norm() < 1e-15);
        let ind = [Complex64::new(1.0, 0.0), Complex64::zero()];
        let m = step_moment(&jp, 1, &ind, &[0.0]).unwrap();
        assert!((m.norm_sq - 0.5).abs() < 1e-15 && (m.transform - 0.5).norm() < 1e-15);
        let m = step_moment(&jp, 2, &one, &[1.0]).unwrap();
        assert!(m.transform.norm() < 1e-15);
        let bad = FourierEval::new(&catalog::stretched_interval());
        assert!(matches!(step_moment(&bad, 1, &ind, &[0.0]), Err(Error::NotSimple(_, _))));
    }

    #[test]
    fn step_moment_against_refined_atoms() {
        // Oracle: integrate against mu_16; the cell of an atom is given by its two coarsest digits.
        let pair = catalog::quarter_cantor().pair;
        let ev = FourierEval::new(&pair);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w: Vec<Complex64> = (0..4).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let xi = [1.0];
        let m = step_moment(&ev, 2, &w, &xi).unwrap();
        let fine = discrete_approximant(&pair, 16).unwrap();
        let approx: Complex64 = fine
            .points
            .iter()
            .enumerate()
            .map(|(i, x)| w[i >> 14] * Complex64::cis(-2.0 * PI * x[0] * xi[0]) * fine.weights[i])
            .sum();
        assert!((m.transform - approx).norm() < 1e-6);
        assert!(m.transform.norm() > 1e-3);
    }

    #[test]
    fn symmetry() {
        let ev = FourierEval::new(&catalog::triangular().pair);
        assert!(conj_symmetry_defect(&ev, &[0.3, -1.7]) < 1e-14);
    }
}
