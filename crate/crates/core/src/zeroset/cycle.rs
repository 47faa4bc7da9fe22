//! Periodic cycles of the transition dynamics inside the zero set, and the
//! rational invariant subspaces that accompany them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{certify_zero, roots, u_rational, window_shifts, Grade};
use crate::config::{ZeroSetConfig, TRANSITION_TOL};
use crate::error::{Error, Result};
use crate::intlat::{char_poly, rational_factors, rational_kernel, IVec, IntMatrix, Lattice, QMat, RatVec, ResidueSystem};
use crate::intlat::poly::{eval_matrix, poly_mul};
use crate::measure::FourierEval;

/// One logged transition `from -> (R^T)^{-1}(from + l) = to`, from orbit level `level` to `level - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleStep {
    pub level: usize,
    pub l: IVec,
    pub from: RatVec,
    pub to: RatVec,
    pub u: f64,
}

/// A point `x0` with `(R^T)^m x0 = x0 mod Z^d` whose whole orbit lies in the zero set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCycle {
    pub x0: RatVec,
    pub period: usize,
    /// `orbit[t] = (R^T)^t x0 mod Z^d`.
    pub orbit: Vec<RatVec>,
    /// Integer basis of the invariant subspace `W`; empty when none was certified.
    pub subspace: Vec<IVec>,
    pub log: Vec<CycleStep>,
    pub grade: Grade,
}

fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn to_ivec(v: &[BigInt]) -> Result<IVec> {
    v.iter().map(|x| x.to_i64().ok_or(Error::Overflow("subspace basis"))).collect()
}

fn positive_lead(v: IVec) -> IVec {
    match v.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => v.iter().map(|c| -c).collect(),
        _ => v,
    }
}

/// Proper non-zero rational subspaces invariant under `a`, as kernels of `g(a)`
/// for the proper divisors `g` of the characteristic polynomial.
pub fn rational_invariant_subspaces(a: &IntMatrix) -> Result<Vec<Vec<IVec>>> {
    let d = a.dim();
    if d > 3 {
        return Err(Error::DimensionUnsupported(d));
    }
    let aq = a.to_q();
    let mut out: Vec<Vec<IVec>> = Vec::new();
    if d > 1 && aq.is_scalar() {
        // Every subspace is invariant; offer the coordinate ones.
        for mask in 1..(1u32 << d) - 1 {
            out.push((0..d).filter(|i| mask >> i & 1 == 1).map(|i| (0..d).map(|j| (i == j) as i64).collect()).collect());
        }
        out.sort_by_key(|w| w.len());
        return Ok(out);
    }
    let factors = rational_factors(&char_poly(a))?;
    for mask in 1..(1u32 << factors.len()) - 1 {
        let g = factors
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .fold(vec![BigInt::from(1)], |acc, (_, f)| poly_mul(&acc, f));
        let ga = eval_matrix(&g, &aq);
        let basis = rational_kernel(&ga);
        if basis.is_empty() || basis.len() >= d {
            continue;
        }
        let invariant = basis.iter().all(|w| {
            let wq: Vec<BigRational> = w.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            ga.mul_vec(&aq.mul_vec(&wq)).iter().all(|x| x.is_zero())
        });
        if !invariant {
            return Err(Error::NotInvariant);
        }
        let basis = basis.iter().map(|w| to_ivec(w).map(positive_lead)).collect::<Result<Vec<_>>>()?;
        if !out.contains(&basis) {
            out.push(basis);
        }
    }
    Ok(out)
}

/// Whether `v` lies in `W + Z^d`, tested through the annihilator `P` of `W`: `P v` must lie in `P Z^d`.
pub fn descent_holds(subspace: &[IVec], v: &RatVec) -> bool {
    let d = v.len();
    let p: Vec<Vec<BigInt>> = if subspace.is_empty() {
        (0..d).map(|i| (0..d).map(|j| BigInt::from((i == j) as i64)).collect()).collect()
    } else {
        let wt = QMat::from_fn(subspace.len(), d, |i, j| q(subspace[i][j]));
        rational_kernel(&wt)
    };
    if p.is_empty() {
        return true;
    }
    let rows = p.len();
    let cols: Vec<Vec<BigInt>> = (0..d).map(|j| (0..rows).map(|i| p[i][j].clone()).collect()).collect();
    let lattice = Lattice::from_int_generators(rows, &cols);
    let pv: Vec<BigRational> = p
        .iter()
        .map(|row| row.iter().zip(&v.0).fold(BigRational::zero(), |acc, (a, x)| acc + x * a))
        .collect();
    lattice.contains(&pv)
}

fn apply_t(rt: &QMat, x: &RatVec) -> RatVec {
    RatVec(rt.mul_vec(&x.0))
}

fn exact_period(rt: &QMat, x0: &RatVec, bound: usize) -> Option<usize> {
    let mut y = x0.clone();
    for m in 1..=bound {
        y = apply_t(rt, &y).mod_one();
        if y == *x0 {
            return Some(m);
        }
    }
    None
}

fn prefilter(eval: &FourierEval, x: &RatVec, tau: f64) -> bool {
    let xf = x.to_f64();
    window_shifts(x.len(), 2).iter().all(|k| {
        let y: Vec<f64> = xf.iter().zip(k).map(|(a, &b)| a + b as f64).collect();
        eval.mu_hat(&y).norm() < tau
    })
}

/// Searches periods `m = 1..=max_period` for a cycle inside the zero set.
pub fn find_invariant_cycle(eval: &FourierEval, cfg: &ZeroSetConfig) -> Result<InvariantCycle> {
    let not_found = Error::NotFound { max_period: cfg.max_period, max_points: cfg.cycle_points_cap };
    let pair = eval.pair();
    let d = pair.dim();
    let rt = pair.r().transpose();
    let rtq = rt.to_q();
    let subspaces = if d <= 3 { rational_invariant_subspaces(&rt)? } else { Vec::new() };
    for m in 1..=cfg.max_period {
        let Ok(pow) = rt.pow(m as u32) else { break };
        let Ok(a) = pow.sub(&IntMatrix::identity(d)) else { break };
        let det = a.det();
        if det.is_zero() {
            continue;
        }
        let count = det.magnitude().to_u128().unwrap_or(u128::MAX);
        if count > cfg.cycle_points_cap {
            break;
        }
        let ainv = a.inverse()?;
        let reps = ResidueSystem::new(&a)?.representatives(cfg.cycle_points_cap)?;
        let mut points: Vec<RatVec> = reps
            .iter()
            .map(|z| RatVec(ainv.mul_vec(&RatVec::integer(z).0)).mod_one())
            .collect();
        points.sort_by(|x, y| (x.max_denom(), x).cmp(&(y.max_denom(), y)));
        points.dedup();
        for x0 in points {
            if exact_period(&rtq, &x0, m) != Some(m) || !prefilter(eval, &x0, cfg.tau) {
                continue;
            }
            if let Some(cycle) = certify_cycle(eval, &rtq, &x0, m, &subspaces, cfg) {
                return Ok(cycle);
            }
        }
    }
    Err(not_found)
}

fn certify_cycle(
    eval: &FourierEval,
    rtq: &QMat,
    x0: &RatVec,
    m: usize,
    subspaces: &[Vec<IVec>],
    cfg: &ZeroSetConfig,
) -> Option<InvariantCycle> {
    let mut orbit = vec![x0.clone()];
    for _ in 1..m {
        orbit.push(apply_t(rtq, orbit.last().unwrap()).mod_one());
    }
    let mut grade = Grade::Exact;
    for o in &orbit {
        let cert = certify_zero(eval, o, cfg.window, cfg.levels);
        if !cert.is_in() {
            return None;
        }
        grade = grade.and(cert.grade);
    }
    let mut log = Vec::with_capacity(m);
    for t in 0..m {
        let from = &orbit[(t + 1) % m];
        let to = &orbit[t];
        let shift = apply_t(rtq, to).sub(from);
        if !shift.is_integral() {
            return None;
        }
        let l: IVec = shift.0.iter().map(|x| x.to_integer().to_i64()).collect::<Option<_>>()?;
        let u = u_rational(eval.pair(), &to.0);
        let possible = match roots::mask_vanishes(eval.pair().digits(), &to.0) {
            Some(v) => !v,
            None => {
                grade = Grade::Numeric;
                u > TRANSITION_TOL
            }
        };
        if !possible {
            return None;
        }
        log.push(CycleStep { level: t + 1, l, from: from.clone(), to: to.clone(), u });
    }
    let samples = [(1, 7), (2, 5), (3, 11)];
    let subspace = subspaces
        .iter()
        .find(|w| {
            w.iter().all(|v| {
                samples.iter().all(|&(num, den)| {
                    let p = RatVec(x0.0.iter().zip(v).map(|(x, &c)| x + BigRational::new(BigInt::from(num * c), BigInt::from(den))).collect());
                    certify_zero(eval, &p, cfg.window, cfg.levels).is_in()
                })
            })
        })
        .cloned()
        .unwrap_or_default();
    Some(InvariantCycle { x0: x0.clone(), period: m, orbit, subspace, log, grade })
}

impl InvariantCycle {
    /// Re-checks periodicity and the descent of every logged transition exactly.
    pub fn check(&self, eval: &FourierEval) -> bool {
        let rtq = eval.pair().r().transpose().to_q();
        if exact_period(&rtq, &self.x0, self.period) != Some(self.period) {
            return false;
        }
        self.log.iter().all(|s| {
            let target = RatVec(eval.inv_t().mul_vec(&s.from.add_int(&s.l).0));
            let expected = &self.orbit[s.level - 1];
            s.u > TRANSITION_TOL && descent_holds(&self.subspace, &target.sub(expected))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn subspaces_of_triangular() {
        let rt = IntMatrix::new(vec![vec![4, 1], vec![0, 2]]).unwrap();
        let s = rational_invariant_subspaces(&rt).unwrap();
        assert_eq!(s, vec![vec![vec![1, -2]], vec![vec![1, 0]]]);
        assert!(rational_invariant_subspaces(&IntMatrix::scalar(3)).unwrap().is_empty());
        let irreducible = IntMatrix::new(vec![vec![0, 3], vec![1, 0]]).unwrap();
        assert!(rational_invariant_subspaces(&irreducible).unwrap().is_empty());
        assert!(rational_invariant_subspaces(&IntMatrix::identity(4)).is_err());
        let axes = rational_invariant_subspaces(&IntMatrix::diag(&[2, 2])).unwrap();
        assert_eq!(axes, vec![vec![vec![1, 0]], vec![vec![0, 1]]]);
    }

    #[test]
    fn descent_membership() {
        let w = vec![vec![1, 0]];
        assert!(descent_holds(&w, &RatVec::from_ints(&[1, 21], 7)));
        assert!(!descent_holds(&w, &RatVec::from_ints(&[0, 1], 3)));
        assert!(descent_holds(&[], &RatVec::integer(&[2, -1])));
        assert!(!descent_holds(&[], &RatVec::from_ints(&[1, 0], 2)));
    }

    #[test]
    fn triangular_cycle() {
        let eval = FourierEval::new(&catalog::triangular().pair);
        let c = find_invariant_cycle(&eval, &ZeroSetConfig::default()).unwrap();
        assert_eq!(c.period, 2);
        assert_eq!(c.x0, RatVec::from_ints(&[0, 1], 3));
        assert_eq!(c.orbit[1], RatVec::from_ints(&[1, 2], 3));
        assert_eq!(c.subspace, vec![vec![1, 0]]);
        assert_eq!(c.grade, Grade::Exact);
        assert!(c.check(&eval));
    }

    #[test]
    fn no_cycle_without_zeros() {
        let cfg = ZeroSetConfig { max_period: 6, ..ZeroSetConfig::default() };
        let leb = FourierEval::new(&catalog::lebesgue(2).pair);
        assert!(matches!(find_invariant_cycle(&leb, &cfg), Err(Error::NotFound { .. })));
        let half = FourierEval::new(&catalog::stretched_interval());
        assert!(matches!(find_invariant_cycle(&half, &cfg), Err(Error::NotFound { .. })));
    }
}
