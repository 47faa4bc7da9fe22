//! Frame levels concatenated into `Lambda` with the same shift corrections as the spectral trees.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{concatenated_bounds, FrameReport};
use crate::config::{CoverConfig, ZeroSetConfig, FRAME_CAP};
use crate::error::{Error, Result};
use crate::intlat::mat::{add_vec, sub_vec};
use crate::intlat::{translate_to_origin, IVec, ResidueSystem};
use crate::measure::{norm_inf, FourierEval};
use crate::spectra::{build_cover, delta_lower_bound, Correction, SpectrumTree, TreeLevel};
use crate::triples::{digit_tower, AffinePair};
use crate::zeroset::{analyze, ZeroSetStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSpectrum {
    pub tree: SpectrumTree,
    pub epsilons: Vec<f64>,
    /// `prod (1 - eps_j)` and `prod (1 + eps_j)`.
    pub c: f64,
    pub cap_c: f64,
    pub delta_cover: f64,
    /// `min_k min_{lambda in Lambda_k} |mu_hat((R^T)^{-m_k} lambda)|^2` over the built levels.
    pub delta_measured: f64,
    /// Each level is deep enough for the cover bound to apply to the next one.
    pub n_rule_holds: bool,
    pub lower: f64,
    pub upper: f64,
}

/// Builds `Lambda` from frame levels, correcting each level with a cover of `T(R^T, L~)`.
///
/// `dual` defaults to a complete residue system modulo `R^T Z^d`.
pub fn frame_spectrum_build(pair: &AffinePair, reports: &[FrameReport], dual: Option<&[IVec]>, cfg: &CoverConfig, zcfg: &ZeroSetConfig) -> Result<FrameSpectrum> {
    let epsilons: Vec<f64> = reports.iter().map(|r| r.epsilon()).collect();
    let (c, cap_c) = concatenated_bounds(&epsilons)?;
    let eval = FourierEval::new(pair);
    match analyze(&eval, zcfg).status {
        ZeroSetStatus::NonEmpty { witness } => return Err(Error::ZeroSetNonEmpty { witness: witness.to_string() }),
        ZeroSetStatus::Undecided => return Err(Error::Undecided("periodic zero set could not be decided".into())),
        ZeroSetStatus::Empty { .. } => {}
    }
    let rt = pair.r().transpose();
    let lbar = match dual {
        Some(l) => translate_to_origin(l).0,
        None => ResidueSystem::new(&rt)?.representatives(FRAME_CAP)?,
    };
    let cover = build_cover(&eval, &AffinePair::from_parts(rt.clone(), lbar.clone())?, cfg)?;
    let d = pair.dim();
    let mut levels = Vec::with_capacity(reports.len());
    for rep in reports {
        let n = rep.n;
        let rt_n = rt.pow(n as u32)?;
        let rs = ResidueSystem::new(&rt_n)?;
        if let Some((a, b)) = rs.collision(&rep.j) {
            return Err(Error::ResidueCollision(a, b));
        }
        // Translating J and moving it within residue classes leaves the frame bounds unchanged.
        let j0 = if rep.j.iter().any(|v| v.iter().all(|&x| x == 0)) { vec![0; d] } else { rep.j[0].clone() };
        let tower = digit_tower(&rt, &lbar, n)?;
        let by_class: HashMap<IVec, IVec> = tower.iter().map(|t| (rs.canonical(t), t.clone())).collect();
        let mut js: Vec<IVec> = Vec::with_capacity(rep.j.len());
        for v in &rep.j {
            let t = sub_vec(v, &j0)?;
            js.push(by_class.get(&rs.canonical(&t)).cloned().ok_or(Error::Inconsistent("dual set is not a complete residue system".into()))?);
        }
        js.sort_by_key(|v| v.iter().any(|&x| x != 0));
        let mut digits = Vec::with_capacity(js.len());
        let mut corrections = Vec::new();
        for j in js {
            if j.iter().all(|&x| x == 0) {
                digits.push(j);
                continue;
            }
            let x = eval.contract(&j.iter().map(|&v| v as f64).collect::<Vec<_>>(), n);
            let k = cover.shift_for(&x);
            if k.iter().any(|&v| v != 0) {
                digits.push(add_vec(&j, &rt_n.mul_vec(&k)?)?);
                corrections.push(Correction { j, k });
            } else {
                digits.push(j);
            }
        }
        levels.push(TreeLevel { n, digits, corrections });
    }
    let mut tree = SpectrumTree::new(pair.r().clone(), levels)?;
    tree.delta_hat = Some(cover.cert.delta0);
    tree.cover = Some(cover.cert.clone());
    let depth = tree.depth();
    let delta_measured = if depth == 0 { 1.0 } else { delta_lower_bound(&tree, &eval, depth)? };
    let sup = eval.sup_norm();
    let mut n_rule_holds = true;
    for k in 1..depth {
        let next = tree.levels[k].n;
        let worst = tree
            .lambda(k, cfg.cap)?
            .iter()
            .map(|v| norm_inf(&eval.contract(&v.iter().map(|&x| x as f64).collect::<Vec<_>>(), next)))
            .fold(0.0, f64::max);
        n_rule_holds &= worst * sup < cover.cert.eps0;
    }
    Ok(FrameSpectrum {
        tree,
        epsilons,
        c,
        cap_c,
        delta_cover: cover.cert.delta0,
        delta_measured,
        n_rule_holds,
        lower: c * delta_measured,
        upper: cap_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{middle_third, quarter_cantor};
    use crate::frames::{frame_report, select_subset, Strategy};
    use crate::spectra::corrected_tree;

    #[test]
    fn hadamard_levels_match_the_corrected_tree() {
        let t = quarter_cantor();
        let cfg = CoverConfig::default();
        let zcfg = ZeroSetConfig::default();
        let tree = corrected_tree(&t, 3, &cfg, &zcfg).unwrap();
        let reports: Vec<FrameReport> = tree
            .levels
            .iter()
            .map(|lv| frame_report(&t.pair, lv.n, digit_tower(&t.r().transpose(), &t.l, lv.n).unwrap()).unwrap())
            .collect();
        let fs = frame_spectrum_build(&t.pair, &reports, Some(&t.l), &cfg, &zcfg).unwrap();
        assert_eq!(fs.tree.levels, tree.levels);
        assert!(fs.c > 1.0 - 1e-9 && fs.cap_c < 1.0 + 1e-9);
    }

    #[test]
    fn middle_third_frame_has_a_positive_lower_bound() {
        let pair = middle_third();
        let reports: Vec<FrameReport> = (0..2).map(|i| select_subset(&pair, 2, Strategy::Greedy, i).unwrap()).collect();
        assert!(reports.iter().all(|r| r.epsilon() < 1.0), "{reports:?}");
        let fs = frame_spectrum_build(&pair, &reports, None, &CoverConfig::default(), &ZeroSetConfig::default()).unwrap();
        assert!(fs.lower > 0.0, "{fs:?}");
        assert!(fs.upper >= fs.lower);
        assert_eq!(fs.tree.size(2), 16);
    }

    #[test]
    fn large_epsilon_is_rejected() {
        let pair = quarter_cantor().pair;
        let bad = frame_report(&pair, 1, vec![vec![0], vec![2]]).unwrap();
        assert!(bad.epsilon() >= 1.0);
        let res = frame_spectrum_build(&pair, &[bad], None, &CoverConfig::default(), &ZeroSetConfig::default());
        assert!(matches!(res, Err(Error::EpsilonTooLarge { .. })));
    }
}
