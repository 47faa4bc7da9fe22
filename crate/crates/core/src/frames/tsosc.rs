//! Sampled check that `T(R,B)` meets the interior of a tile `T(R, B~)` with `B ⊂ B~`.
//!
//! `T = T(R, B~)` with `B~` a complete residue system satisfies `T + Z^d = R^d`.
//! A point `x` of `T(R,B)` whose distance to every translate `T + k`, `k != 0`,
//! exceeds the margin is therefore interior to `T`. Translates are covered by
//! level-`D` pieces `R^{-D}(T + b)` of known radius, which turns sampled
//! distances into lower bounds.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{FRAME_CAP, TSOSC_MARGIN, TSOSC_MIN_WITNESSES, TSOSC_QUERIES, TSOSC_SAMPLES};
use crate::error::{Error, Result};
use crate::intlat::{smallest_invariant_lattice, translate_to_origin, IVec, Mat, ResidueSystem};
use crate::measure::attractor_box;
use crate::triples::{digit_tower, AffinePair};

/// Depth of the query expansions.
const QUERY_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TsoscVerdict {
    Holds,
    HoldsTrivially1D,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsoscReport {
    pub verdict: TsoscVerdict,
    /// The complete residue system `B~` containing `B`.
    pub extension: Vec<IVec>,
    /// `Z[R, B~ - B~] = Z^d`, a necessary condition for `T` to tile by `Z^d`.
    pub tile_lattice_full: bool,
    pub queries: usize,
    pub witnesses: usize,
    pub piece_depth: usize,
    pub piece_radius: f64,
    pub margin: f64,
}

/// `B` extended by canonical representatives of the classes it misses.
pub fn extend_to_complete(pair: &AffinePair) -> Result<Vec<IVec>> {
    let rs = ResidueSystem::new(pair.r())?;
    if rs.collision(pair.digits()).is_some() {
        return Err(Error::DigitsNotExtendable);
    }
    let hit: HashSet<IVec> = pair.digits().iter().map(|b| rs.canonical(b)).collect();
    let mut out = pair.digits().to_vec();
    out.extend(rs.representatives(FRAME_CAP)?.into_iter().filter(|c| !hit.contains(c)));
    Ok(out)
}

pub fn tsosc_check(pair: &AffinePair) -> Result<TsoscReport> {
    tsosc_check_with(pair, TSOSC_SAMPLES, TSOSC_QUERIES, TSOSC_MARGIN, 0, true)
}

/// Sampled check with explicit budgets; `trivial_1d` enables the interval shortcut.
pub fn tsosc_check_with(pair: &AffinePair, samples: usize, queries: usize, margin: f64, seed: u64, trivial_1d: bool) -> Result<TsoscReport> {
    let d = pair.dim();
    let ext = extend_to_complete(pair)?;
    let (ext0, _) = translate_to_origin(&ext);
    let tile_lattice_full = smallest_invariant_lattice(pair.r(), &ext0)?.is_whole_space();
    let r0 = pair.r().get(0, 0);
    if trivial_1d && d == 1 && r0 > 0 && pair.digits().iter().all(|b| (0..r0).contains(&b[0])) {
        return Ok(TsoscReport {
            verdict: TsoscVerdict::HoldsTrivially1D,
            extension: (0..r0).map(|x| vec![x]).collect(),
            tile_lattice_full: true,
            queries: 0,
            witnesses: 0,
            piece_depth: 0,
            piece_radius: 0.0,
            margin,
        });
    }
    let tile_pair = AffinePair::new(pair.r().clone(), ext.clone())?;
    let tbox = attractor_box(&tile_pair);
    let center: Vec<f64> = tbox.lo.iter().zip(&tbox.hi).map(|(l, h)| (l + h) / 2.0).collect();
    let half = tbox.width().iter().fold(0.0f64, |a, w| a.max(w / 2.0));
    let det = pair.r().abs_det()? as f64;
    let depth = ((samples.max(2) as f64).ln() / det.ln()).floor().max(1.0) as usize;
    let inv = pair.r().inverse()?.to_f64();
    let mut inv_d = Mat::<f64>::identity(d);
    for _ in 0..depth {
        inv_d = inv_d.matmul(&inv);
    }
    let rho = inv_d.norm_inf() * half;
    let pieces = digit_tower(pair.r(), &ext, depth)?;
    let centers: Vec<Vec<f64>> = pieces
        .iter()
        .map(|b| inv_d.apply(&b.iter().zip(&center).map(|(&x, c)| x as f64 + c).collect::<Vec<_>>()))
        .collect();

    let bbox = attractor_box(pair);
    let reach = bbox.lo.iter().zip(&bbox.hi).fold(0.0f64, |a, (l, h)| a.max(l.abs()).max(h.abs()));
    let mut inv_q = Mat::<f64>::identity(d);
    for _ in 0..QUERY_DEPTH {
        inv_q = inv_q.matmul(&inv);
    }
    let rho_q = inv_q.norm_inf() * reach;
    let tau = rho + margin + rho_q;

    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / tau).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, c) in centers.iter().enumerate() {
        grid.entry(key(c)).or_default().push(i);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32)).map(|mut m| (0..d).map(|_| { let o = (m % 3) as i64 - 1; m /= 3; o }).collect()).collect();
    let near = |z: &[f64]| -> bool {
        let base = key(z);
        offsets.iter().any(|o| {
            let cell: Vec<i64> = base.iter().zip(o).map(|(a, b)| a + b).collect();
            grid.get(&cell).map_or(false, |ids| ids.iter().any(|&i| centers[i].iter().zip(z).all(|(c, v)| (c - v).abs() <= tau)))
        })
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let digits: Vec<Vec<f64>> = pair.digits().iter().map(|b| b.iter().map(|&x| x as f64).collect()).collect();
    let mut witnesses = 0;
    for _ in 0..queries {
        let mut x = vec![0.0; d];
        for _ in 0..QUERY_DEPTH {
            let b = &digits[rng.gen_range(0..digits.len())];
            let y: Vec<f64> = x.iter().zip(b).map(|(a, c)| a + c).collect();
            x = inv.apply(&y);
        }
        // Integer translates whose box comes within tau of x.
        let ranges: Vec<(i64, i64)> = (0..d).map(|i| ((x[i] - tau - tbox.hi[i]).ceil() as i64, (x[i] + tau - tbox.lo[i]).floor() as i64)).collect();
        let mut k = ranges.iter().map(|r| r.0).collect::<Vec<_>>();
        let mut blocked = false;
        'outer: loop {
            if k.iter().any(|&v| v != 0) {
                let z: Vec<f64> = x.iter().zip(&k).map(|(a, &b)| a - b as f64).collect();
                if near(&z) {
                    blocked = true;
                    break 'outer;
                }
            }
            let mut i = 0;
            loop {
                if i == d {
                    break 'outer;
                }
                k[i] += 1;
                if k[i] <= ranges[i].1 {
                    break;
                }
                k[i] = ranges[i].0;
                i += 1;
            }
        }
        if !blocked {
            witnesses += 1;
        }
    }
    let verdict = if witnesses >= TSOSC_MIN_WITNESSES { TsoscVerdict::Holds } else { TsoscVerdict::Unknown };
    Ok(TsoscReport { verdict, extension: ext, tile_lattice_full, queries, witnesses, piece_depth: depth, piece_radius: rho, margin })
}
