//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectral_fractal::catalog::{middle_third, quarter_cantor, stretched_interval, triangular};
use spectral_fractal::config::{CoverConfig, PipelineConfig, ZeroSetConfig};
use spectral_fractal::frames::{
    exhaustive_subset, frame_report, frame_spectrum_build, full_dual_set, parseval_defect, select_subset, select_subset_with_budget, Strategy,
};
use spectral_fractal::intlat::{reduce_to_full, smallest_invariant_lattice, IntMatrix, Lattice, RatVec};
use spectral_fractal::measure::{discrete_approximant, FourierEval};
use spectral_fractal::quasiprod::{full_spectrum, quasi_product, Branch};
use spectral_fractal::spectra::{canonical_tree, jp_sum, orthogonality_check};
use spectral_fractal::triples::{digit_tower, tower, validate_triple, AffinePair};
use spectral_fractal::zeroset::{analyze, certify_zero, CertStatus, ZeroSetStatus};

const HADAMARD_TOL: f64 = 1e-12;
const ORTHOGONALITY_TOL: f64 = 1e-8;
const JP_LEVEL: usize = 12;
const JP_FLOOR: f64 = 0.95;
const JP_CEILING: f64 = 1.0 + 1e-6;
const JP_SAMPLES: usize = 100;
const ORACLE_TOL: f64 = 1e-6;
const ORACLE_DEPTH: usize = 20;
const ORACLE_SAMPLES: usize = 100;
const TRIANGULAR_WINDOW: i64 = 10;
const TRIANGULAR_LEVELS: usize = 30;
const PRODUCT_FLOOR: f64 = 0.95;
const TIGHT_TOL: f64 = 1e-9;
const TOWER_EPS_TOL: f64 = 1e-10;
const SELECTION_TOL: f64 = 1e-12;
const LOWER_SLACK: f64 = 1e-6;
const MONOTONE_SLACK: f64 = 1e-12;
const SEED: u64 = 20240611;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|x| x.to_string())
}

fn pair(r: i64, b: &[i64]) -> AffinePair {
    AffinePair::new(IntMatrix::scalar(r), b.iter().map(|&x| vec![x]).collect()).unwrap()
}

fn hadamard_validation() -> Check {
    let mut worst = 0.0f64;
    for t in [quarter_cantor(), triangular()] {
        let (ok, defect) = e(validate_triple(t.r(), t.b(), &t.l))?;
        ensure(ok && defect < HADAMARD_TOL, format!("defect {defect:e}"))?;
        for k in 1..=4 {
            let tk = e(tower(&t, k))?;
            let (ok, defect) = e(validate_triple(tk.r(), tk.b(), &tk.l))?;
            ensure(ok && defect < HADAMARD_TOL, format!("tower {k}: defect {defect:e}"))?;
            worst = worst.max(defect);
        }
    }
    Ok(format!("worst tower defect {worst:.1e}"))
}

fn jp_spectrum() -> Check {
    let tree = e(canonical_tree(&quarter_cantor(), 3))?;
    let got: BTreeSet<i64> = e(tree.lambda(3, 1 << 20))?.into_iter().map(|v| v[0]).collect();
    let want: BTreeSet<i64> = [0, 1, 4, 5, 16, 17, 20, 21].into_iter().collect();
    ensure(got == want, format!("got {got:?}"))?;
    Ok(format!("{got:?}"))
}

fn orthogonality() -> Check {
    let t = quarter_cantor();
    let tree = e(canonical_tree(&t, 6))?;
    ensure(tree.size(6) == 64, "expected 64 points")?;
    let cross = e(orthogonality_check(&tree, &FourierEval::new(&t.pair), 6))?;
    ensure(cross < ORTHOGONALITY_TOL, format!("max cross term {cross:e}"))?;
    Ok(format!("max cross term {cross:.1e}"))
}

fn jp_completeness() -> Check {
    let t = quarter_cantor();
    let eval = FourierEval::new(&t.pair);
    let tree = e(canonical_tree(&t, JP_LEVEL))?;
    let levels: Vec<Vec<Vec<i64>>> = (1..=JP_LEVEL).map(|k| tree.lambda(k, 1 << 20)).collect::<Result<_, _>>().map_err(|x| x.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut lowest = f64::INFINITY;
    for _ in 0..JP_SAMPLES {
        let xi = [rng.gen_range(0.0..1.0)];
        let mut prev = 0.0;
        for (k, pts) in levels.iter().enumerate() {
            let q = jp_sum(&eval, pts, &xi);
            ensure(q + MONOTONE_SLACK >= prev, format!("Q decreases at K={} for xi={}", k + 1, xi[0]))?;
            ensure(q <= JP_CEILING, format!("Q_{} = {q} above 1 at xi={}", k + 1, xi[0]))?;
            prev = q;
        }
        lowest = lowest.min(prev);
    }
    ensure(lowest >= JP_FLOOR, format!("min Q_{JP_LEVEL} = {lowest}"))?;
    Ok(format!("min Q_{JP_LEVEL} = {lowest:.4}"))
}

fn fourier_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst = 0.0f64;
    for p in [quarter_cantor().pair, middle_third(), stretched_interval()] {
        let eval = FourierEval::new(&p);
        let disc = e(discrete_approximant(&p, ORACLE_DEPTH))?;
        for _ in 0..ORACLE_SAMPLES {
            let xi = [rng.gen_range(-5.0..5.0)];
            let diff = (eval.mu_hat_truncated(&xi, ORACLE_DEPTH) - disc.fourier(&xi)).norm();
            worst = worst.max(diff);
        }
    }
    ensure(worst < ORACLE_TOL, format!("largest difference {worst:e}"))?;
    Ok(format!("largest difference {worst:.1e}"))
}

fn zero_sets() -> Check {
    let cfg = ZeroSetConfig::default();
    let half = RatVec::from_ints(&[1], 2);
    let c = certify_zero(&FourierEval::new(&stretched_interval()), &half, cfg.window, cfg.levels);
    ensure(c.status == CertStatus::CertifiedIn, format!("1/2: {:?}", c.status))?;
    let third = RatVec::from_ints(&[0, 1], 3);
    let c = certify_zero(&FourierEval::new(&triangular().pair), &third, TRIANGULAR_WINDOW, TRIANGULAR_LEVELS);
    ensure(c.status == CertStatus::CertifiedIn, format!("(0,1/3): {:?}", c.status))?;
    let coprime = [pair(2, &[0, 1]), pair(3, &[0, 1]), pair(4, &[0, 1]), pair(5, &[0, 2, 3]), pair(6, &[0, 1, 3])];
    for p in &coprime {
        let st = analyze(&FourierEval::new(p), &cfg).status;
        ensure(matches!(st, ZeroSetStatus::Empty { .. }), format!("{:?}: {st:?}", p.digits()))?;
    }
    Ok(format!("1/2 and (0,1/3) certified, {} coprime pairs empty", coprime.len()))
}

fn lattice() -> Check {
    let t = triangular();
    let l = e(smallest_invariant_lattice(t.r(), t.b()))?;
    let z2 = Lattice::integer(2);
    ensure(l.contains_lattice(&z2) && z2.contains_lattice(&l), "Z[R,B] differs from Z^2")?;
    let q = quarter_cantor();
    let red = e(reduce_to_full(q.r(), q.b(), None))?;
    let g = red.digits.iter().fold(0i64, |g, v| num_integer::gcd(g, v[0]));
    ensure(g == 1, format!("reduced digits {:?}", red.digits))?;
    Ok(format!("Z[R,B] = Z^2; reduced digits {:?}", red.digits))
}

fn quasi_product_pipeline() -> Check {
    let t = triangular();
    let cfg = PipelineConfig::default();
    let qp = e(quasi_product(&t, &cfg))?;
    let form = qp.form.ok_or("no quasi-product form")?;
    ensure(form.rank == 1, format!("rank {}", form.rank))?;
    ensure(form.r1 == IntMatrix::scalar(4) && form.r2 == IntMatrix::scalar(2), "blocks differ from R1 = 4, R2 = 2")?;
    let pi1: BTreeSet<Vec<i64>> = form.pi1().into_iter().collect();
    ensure(pi1 == [vec![0], vec![1]].into_iter().collect(), format!("pi1(B) = {pi1:?}"))?;
    ensure(e(form.det_q())? == 3, "|det Q| differs from 3")?;
    let rep = e(full_spectrum(&t, &cfg))?;
    let Branch::QuasiProduct { product, .. } = &rep.branch else { return Err("expected the product branch".into()) };
    ensure(product.beta == 3, format!("fiber spacing 1/{}", product.beta))?;
    let three = BigRational::from_integer(BigInt::from(3));
    let on_grid = rep.sample.iter().all(|p| p.0[0].is_integer() && (&p.0[1] * &three).is_integer());
    ensure(on_grid, "sample outside Z x (1/3)Z")?;
    let third = BigRational::new(BigInt::one(), BigInt::from(3));
    ensure(rep.sample.iter().any(|p| p.0[0].is_zero() && p.0[1] == third), "(0, 1/3) missing from the sample")?;
    ensure(rep.jp_min >= PRODUCT_FLOOR, format!("sweep minimum {}", rep.jp_min))?;
    Ok(format!("rank 1, R1 = 4, R2 = 2, |det Q| = 3, sweep minimum {:.4}", rep.jp_min))
}

fn tight_frames() -> Check {
    let p = middle_third();
    let mut worst = 0.0f64;
    for n in 1..=4 {
        let full = e(full_dual_set(&p, n))?;
        let rep = e(frame_report(&p, n, full))?;
        let want = 1.5f64.powi(n as i32);
        let dev = (rep.sigma_min_sq - want).abs().max((rep.sigma_max_sq - want).abs());
        ensure(dev < TIGHT_TOL, format!("n = {n}: [{}, {}] vs {want}", rep.sigma_min_sq, rep.sigma_max_sq))?;
        worst = worst.max(dev);
    }
    let mut eps = 0.0f64;
    for t in [quarter_cantor(), triangular()] {
        for n in 1..=4 {
            let j = e(digit_tower(&t.r().transpose(), &t.l, n))?;
            let rep = e(frame_report(&t.pair, n, j))?;
            eps = eps.max(rep.epsilon());
        }
    }
    ensure(eps <= TOWER_EPS_TOL, format!("tower epsilon {eps:e}"))?;
    Ok(format!("full-set deviation {worst:.1e}, tower epsilon {eps:.1e}"))
}

fn subset_selection() -> Check {
    let p = middle_third();
    let exact = e(exhaustive_subset(&p, 1, 1000))?;
    let heur = e(select_subset(&p, 1, Strategy::Greedy, SEED))?;
    ensure((exact.ratio - heur.ratio).abs() <= SELECTION_TOL * exact.ratio, format!("n = 1: exhaustive {} vs heuristic {}", exact.ratio, heur.ratio))?;
    let mut reports = vec![exact, heur];
    for n in 1..=3 {
        for seed in [SEED, SEED + 1, SEED + 2] {
            let mut prev = f64::INFINITY;
            for budget in [0, 10, 100, 1000, 2000] {
                let rep = e(select_subset_with_budget(&p, n, Strategy::Greedy, seed, budget))?;
                ensure(rep.ratio <= prev, format!("n = {n}, seed {seed}: ratio rises to {} at budget {budget}", rep.ratio))?;
                prev = rep.ratio;
                reports.push(rep);
            }
        }
    }
    let checked = reports.iter().filter(|r| r.sigma_max_sq < 2.0).count();
    for r in reports.iter().filter(|r| r.sigma_max_sq < 2.0) {
        ensure(r.residues_distinct, format!("n = {}: residues collide with sigma_max^2 = {}", r.n, r.sigma_max_sq))?;
    }
    Ok(format!("n = 1 optimum {:.6}, {checked} levels with sigma_max^2 < 2 have distinct residues", reports[0].ratio))
}

fn parseval_behaviour() -> Check {
    let t = quarter_cantor();
    let eval = FourierEval::new(&t.pair);
    let tree = e(canonical_tree(&t, 8))?;
    let mut prev = 0.0;
    let mut last = 0.0;
    for k in 3..=8 {
        let stats = e(parseval_defect(&eval, &e(tree.lambda(k, 1 << 20))?, 3, 8, SEED))?;
        ensure(stats.min + MONOTONE_SLACK >= prev, format!("K = {k}: defect minimum drops to {}", stats.min))?;
        ensure(stats.max <= 1.0 + MONOTONE_SLACK, format!("K = {k}: ratio {} above 1", stats.max))?;
        prev = stats.min;
        last = stats.mean;
    }
    ensure(last >= JP_FLOOR, format!("mean ratio {last} at K = 8"))?;

    let cover = CoverConfig::default();
    let zero = ZeroSetConfig::default();
    let towers = (1..=3).map(|_| frame_report(&t.pair, 1, t.l.clone())).collect::<Result<Vec<_>, _>>().map_err(|x| x.to_string())?;
    let mt = middle_third();
    let greedy = [2, 2].iter().map(|&n| select_subset(&mt, n, Strategy::Greedy, SEED)).collect::<Result<Vec<_>, _>>().map_err(|x| x.to_string())?;
    let mut margins = Vec::new();
    for (p, reports, dual) in [(&t.pair, towers, Some(t.l.as_slice())), (&mt, greedy, None)] {
        let fs = e(frame_spectrum_build(p, &reports, dual, &cover, &zero))?;
        let k = fs.tree.depth();
        let lam = e(fs.tree.lambda(k, 1 << 20))?;
        let ev = FourierEval::new(p);
        let stats = e(parseval_defect(&ev, &lam, fs.tree.m(k), 16, SEED))?;
        ensure(stats.min >= fs.lower - LOWER_SLACK, format!("{:?}: ratio {} below lower estimate {}", p.digits(), stats.min, fs.lower))?;
        margins.push(stats.min - fs.lower);
    }
    Ok(format!("mean ratio {last:.4} at K = 8; lower-estimate margins {margins:.3?}"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Check); 11] = [
        ("Hadamard validation", Duration::from_secs(1), hadamard_validation),
        ("quarter Cantor spectrum", Duration::from_secs(1), jp_spectrum),
        ("orthogonality", Duration::from_secs(10), orthogonality),
        ("completeness sums", Duration::from_secs(60), jp_completeness),
        ("Fourier-transform oracle", Duration::from_secs(30), fourier_oracle),
        ("zero-set certifications", Duration::from_secs(60), zero_sets),
        ("lattice", Duration::from_secs(1), lattice),
        ("quasi-product end-to-end", Duration::from_secs(300), quasi_product_pipeline),
        ("frame tightness identities", Duration::from_secs(30), tight_frames),
        ("subset-selection properties", Duration::from_secs(300), subset_selection),
        ("Parseval defect and lower estimates", Duration::from_secs(120), parseval_behaviour),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let outcome = outcome.and_then(|m| if took <= *budget { Ok(m) } else { Err(format!("{m}; took {took:.2?}, budget {budget:?}")) });
        match outcome {
            Ok(m) => println!("PASS criterion {}: {name}: {m} ({took:.2?})", i + 1),
            Err(m) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {m} ({took:.2?})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
