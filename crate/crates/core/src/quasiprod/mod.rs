//! Block-triangular conjugation, the quasi-product form of the digits and the
//! product spectrum used when the periodic zero set is non-empty.

mod pipeline;
mod product;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlat::reduce::ConjugationSummary;
use crate::intlat::{hermite_normal_form, ConjugationRecord, IVec, IntMatrix, Lattice, Mat, QMat, RatVec, ResidueSystem, ZMat};
use crate::triples::validate_triple;

pub use crate::config::PipelineConfig;
pub use pipeline::{full_spectrum, quasi_product, Branch, QuasiProductAnalysis, SpectrumReport};
pub use product::{product_spectrum, sweep_product, BetaTrial, ProductSpectrum};

/// `M R M^{-1} = [[R1, 0], [C, R2]]` with `M` unimodular.
#[derive(Debug, Clone)]
pub struct Triangularization {
    pub record: ConjugationRecord,
    pub r_tilde: IntMatrix,
    pub rank: usize,
    pub r1: IntMatrix,
    /// `(d - r) x r`, row-major.
    pub c: Vec<IVec>,
    pub r2: IntMatrix,
}

impl Triangularization {
    /// Unimodular `M` as an integer matrix.
    pub fn m(&self) -> Result<IntMatrix> {
        IntMatrix::from_z(&self.record.m.to_z().ok_or(Error::Inconsistent("non-integral M".into()))?)
    }

    /// `(M^T)^{-1}`, which carries frequencies into the new coordinates.
    pub fn m_inv_t(&self) -> Result<IntMatrix> {
        IntMatrix::from_z(&self.record.m_inv.transpose().to_z().ok_or(Error::Inconsistent("non-integral M^{-1}".into()))?)
    }
}

fn to_ivec(v: &[BigInt]) -> Result<IVec> {
    v.iter().map(|x| x.to_i64().ok_or(Error::Overflow("integer vector"))).collect()
}

fn block(m: &IntMatrix, r0: usize, r1: usize, c0: usize, c1: usize) -> Mat<i64> {
    m.mat().block(r0, r1, c0, c1)
}

/// Conjugates `R` so that the `R^T`-invariant subspace spanned by `w` becomes `R^r x {0}`
/// for the dual coordinates, which makes `R~` block lower-triangular.
pub fn triangularize(r: &IntMatrix, w: &[IVec]) -> Result<Triangularization> {
    let d = r.dim();
    if w.iter().any(|v| v.len() != d) {
        return Err(Error::DimensionMismatch(format!("subspace vectors must have length {d}")));
    }
    let wt = ZMat::from_fn(w.len(), d, |i, j| BigInt::from(w[i][j]));
    let hnf = hermite_normal_form(&wt);
    let rank = hnf.rank;
    if rank == 0 || rank >= d {
        return Err(Error::NotProper);
    }
    // w^T V = [H, 0], so V^T w lies in R^r x {0}; take M = V^{-1}.
    let v = hnf.u;
    let m = v.to_q().inverse()?.to_z().ok_or(Error::Inconsistent("HNF transform is not unimodular".into()))?;
    let record = ConjugationRecord::from_unimodular(&m, &v);
    let r_tilde = IntMatrix::from_z(&m.mul(&r.to_z()).mul(&v))?;
    if (0..rank).any(|i| (rank..d).any(|j| r_tilde.get(i, j) != 0)) {
        return Err(Error::NotInvariant);
    }
    let r1 = IntMatrix::from_mat(block(&r_tilde, 0, rank, 0, rank))?;
    let r2 = IntMatrix::from_mat(block(&r_tilde, rank, d, rank, d))?;
    let c = block(&r_tilde, rank, d, 0, rank).to_rows();
    Ok(Triangularization { record, r_tilde, rank, r1, c, r2 })
}

/// Replaces dual digits so that `pi2(l) = pi2(l')` whenever the two are congruent
/// modulo `R2^T Z^{d-r}`, keeping each digit in its class modulo `R~^T Z^d`.
pub fn normalize_l(r_tilde: &IntMatrix, b: &[IVec], l: &[IVec], rank: usize) -> Result<Vec<IVec>> {
    let d = r_tilde.dim();
    if rank == 0 || rank >= d {
        return Err(Error::NotProper);
    }
    let r2t = IntMatrix::from_mat(block(r_tilde, rank, d, rank, d))?.transpose();
    let r2t_inv = r2t.inverse()?;
    let rs = ResidueSystem::new(&r2t)?;
    let rtt = r_tilde.transpose();
    let mut first: BTreeMap<IVec, IVec> = BTreeMap::new();
    let mut out = Vec::with_capacity(l.len());
    for ell in l {
        let l2 = ell[rank..].to_vec();
        let rep = first.entry(rs.canonical(&l2)).or_insert_with(|| l2.clone()).clone();
        if rep == l2 {
            out.push(ell.clone());
            continue;
        }
        let diff: Vec<BigRational> = l2.iter().zip(&rep).map(|(a, b)| BigRational::from_integer(BigInt::from(a - b))).collect();
        let s = r2t_inv.mul_vec(&diff);
        if !s.iter().all(|x| x.is_integer()) {
            return Err(Error::Inconsistent("congruent fibers differ by a non-lattice vector".into()));
        }
        let mut shift = vec![0i64; d];
        for (i, x) in s.iter().enumerate() {
            shift[rank + i] = x.to_integer().to_i64().ok_or(Error::Overflow("dual digit shift"))?;
        }
        // l'' = l' + R~^T (0, (R2^T)^{-1}(l2 - l2')) has pi2(l'') = l2.
        let moved = crate::intlat::mat::sub_vec(ell, &rtt.mul_vec(&shift)?)?;
        debug_assert_eq!(moved[rank..], rep[..]);
        out.push(moved);
    }
    let (ok, defect) = validate_triple(r_tilde, b, &out)?;
    if !ok {
        return Err(Error::NotHadamard { defect });
    }
    if !pi2_injective(r_tilde, &out, rank)? {
        return Err(Error::Inconsistent("normalized dual digits are still not injective on classes".into()));
    }
    Ok(out)
}

/// Congruent second components mod `R2^T` are equal.
pub fn pi2_injective(r_tilde: &IntMatrix, l: &[IVec], rank: usize) -> Result<bool> {
    let d = r_tilde.dim();
    let rs = ResidueSystem::new(&IntMatrix::from_mat(block(r_tilde, rank, d, rank, d))?.transpose())?;
    let mut seen: BTreeMap<IVec, IVec> = BTreeMap::new();
    for ell in l {
        let l2 = ell[rank..].to_vec();
        if let Some(prev) = seen.insert(rs.canonical(&l2), l2.clone()) {
            if prev != l2 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Fiber digits `v + Q c_j` over one first-block digit `u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiDigit {
    pub u: IVec,
    pub v: IVec,
    pub c: Vec<IVec>,
}

/// `B~ = {(u_i, v_i + Q c_ij)}` with `R2 Q = Q R2~`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiProductForm {
    pub conjugation: ConjugationSummary,
    pub rank: usize,
    pub r1: IntMatrix,
    pub r2: IntMatrix,
    pub c: Vec<IVec>,
    pub digits: Vec<QuasiDigit>,
    /// Basis of `Gamma` as columns, stored row-major.
    pub q: Vec<IVec>,
    pub r2_tilde: IntMatrix,
    pub y0: RatVec,
    pub period: usize,
    pub grade: crate::zeroset::Grade,
}

impl QuasiProductForm {
    pub fn n1(&self) -> usize {
        self.digits.len()
    }

    pub fn q_matrix(&self) -> Result<IntMatrix> {
        IntMatrix::new(self.q.clone())
    }

    pub fn det_q(&self) -> Result<u64> {
        self.q_matrix()?.abs_det()
    }

    /// The digit set rebuilt from `(u_i, v_i, Q, c_ij)`.
    pub fn reconstruct(&self) -> Result<Vec<IVec>> {
        let q = self.q_matrix()?;
        let mut out = Vec::new();
        for g in &self.digits {
            for c in &g.c {
                let mut b = g.u.clone();
                b.extend(crate::intlat::mat::add_vec(&g.v, &q.mul_vec(c)?)?);
                out.push(b);
            }
        }
        Ok(out)
    }

    /// First-block projection `pi1(B)`.
    pub fn pi1(&self) -> Vec<IVec> {
        self.digits.iter().map(|g| g.u.clone()).collect()
    }
}

/// `Gamma = {x : <x, (R2^T)^{-1} y_j> in Z, j = 1..m}` with `y_j = (R2^T)^j y0`.
pub fn gamma_lattice(r2: &IntMatrix, y0: &RatVec, period: usize) -> Result<Lattice> {
    let k = r2.dim();
    if y0.len() != k {
        return Err(Error::DimensionMismatch(format!("y0 must have length {k}")));
    }
    let r2t = r2.to_q().transpose();
    let mut gens: Vec<Vec<BigRational>> = (0..k).map(|i| crate::intlat::mat::to_rational(&(0..k).map(|j| (i == j) as i64).collect::<Vec<_>>())).collect();
    // (R2^T)^{-1} y_j = (R2^T)^{j-1} y0.
    let mut z = y0.0.clone();
    for _ in 0..period.max(1) {
        gens.push(z.clone());
        z = r2t.mul_vec(&z);
    }
    Lattice::from_rational_generators(k, &gens).dual()
}

fn qmat_to_rows(m: &QMat) -> Result<Vec<IVec>> {
    let z = m.to_z().ok_or(Error::Inconsistent("non-integral lattice basis".into()))?;
    z.to_rows().iter().map(|r| to_ivec(r)).collect()
}

/// Splits `B~` over its first-block projection and factors the fibers through `Gamma`.
///
/// `y0` is the second block of a cycle point in the conjugated frequency coordinates.
pub fn decompose(tri: &Triangularization, b_tilde: &[IVec], y0: &RatVec, period: usize, grade: crate::zeroset::Grade) -> Result<QuasiProductForm> {
    let r = tri.rank;
    let d = tri.r_tilde.dim();
    let det2 = tri.r2.abs_det()? as usize;
    let rs2 = ResidueSystem::new(&tri.r2)?;
    let mut groups: BTreeMap<IVec, Vec<IVec>> = BTreeMap::new();
    for b in b_tilde {
        if b.len() != d {
            return Err(Error::DimensionMismatch(format!("digits must have length {d}")));
        }
        groups.entry(b[..r].to_vec()).or_default().push(b[r..].to_vec());
    }
    for (u, fiber) in &groups {
        if fiber.len() != det2 || rs2.collision(fiber).is_some() {
            return Err(Error::NotCompleteReps { u: u.clone() });
        }
    }
    if groups.len() * det2 != b_tilde.len() {
        return Err(Error::Inconsistent(format!("{} fibers of size {det2} against {} digits", groups.len(), b_tilde.len())));
    }
    let gamma = gamma_lattice(&tri.r2, y0, period)?;
    let qb = gamma.basis();
    let det = qb.to_z().ok_or(Error::Inconsistent("Gamma is not an integer lattice".into()))?.det();
    if det.abs() < BigInt::from(2) {
        return Err(Error::GammaFullOrTrivial { det: det.abs().to_string() });
    }
    let q_inv = qb.inverse()?;
    let mut digits = Vec::with_capacity(groups.len());
    for (u, mut fiber) in groups {
        fiber.sort();
        let v = fiber[0].clone();
        let mut c = Vec::with_capacity(fiber.len());
        for w in &fiber {
            let diff: Vec<BigRational> = w.iter().zip(&v).map(|(a, b)| BigRational::from_integer(BigInt::from(a - b))).collect();
            let cj = q_inv.mul_vec(&diff);
            if !cj.iter().all(|x| x.is_integer()) {
                return Err(Error::Inconsistent(format!("fiber digit {w:?} over {u:?} is not in v + Gamma")));
            }
            c.push(to_ivec(&cj.iter().map(|x| x.to_integer()).collect::<Vec<_>>())?);
        }
        digits.push(QuasiDigit { u, v, c });
    }
    let r2_tilde_q = q_inv.mul(&tri.r2.to_q()).mul(&qb);
    let r2_tilde = IntMatrix::new(qmat_to_rows(&r2_tilde_q)?).map_err(|_| Error::Inconsistent("R2 does not preserve Gamma".into()))?;
    let q = qmat_to_rows(&qb)?;
    if tri.r2.to_q().mul(&qb) != qb.mul(&r2_tilde.to_q()) {
        return Err(Error::Inconsistent("R2 Q != Q R2~".into()));
    }
    Ok(QuasiProductForm {
        conjugation: tri.record.summary(),
        rank: r,
        r1: tri.r1.clone(),
        r2: tri.r2.clone(),
        c: tri.c.clone(),
        digits,
        q,
        r2_tilde,
        y0: y0.clone(),
        period,
        grade,
    })
}

/// Result of re-validating the sub-triples of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubTripleCheck {
    /// `(R1, pi1(B), L1(l2))` for each `l2` in `pi2(L)`.
    pub first: Vec<(IVec, bool, f64)>,
    /// `(R2, B2(b1), pi2(L))` for each `b1` in `pi1(B)`.
    pub second: Vec<(IVec, bool, f64)>,
}

impl SubTripleCheck {
    pub fn all_valid(&self) -> bool {
        self.first.iter().chain(&self.second).all(|t| t.1)
    }
}

/// `L1(l2) = {l1 : (l1, l2) in L}`.
pub fn fiber_dual(l: &[IVec], rank: usize, l2: &[i64]) -> Vec<IVec> {
    l.iter().filter(|v| &v[rank..] == l2).map(|v| v[..rank].to_vec()).collect()
}

/// Validates every sub-triple of a block-triangular triple with normalized `L`.
pub fn check_subtriples(tri: &Triangularization, b: &[IVec], l: &[IVec]) -> Result<SubTripleCheck> {
    let r = tri.rank;
    let pi1: Vec<IVec> = b.iter().map(|v| v[..r].to_vec()).collect::<BTreeSet<_>>().into_iter().collect();
    let pi2l: Vec<IVec> = l.iter().map(|v| v[r..].to_vec()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut first = Vec::new();
    for l2 in &pi2l {
        let l1 = fiber_dual(l, r, l2);
        let (ok, defect) = if l1.len() == pi1.len() { validate_triple(&tri.r1, &pi1, &l1)? } else { (false, f64::INFINITY) };
        first.push((l2.clone(), ok, defect));
    }
    let mut second = Vec::new();
    for u in &pi1 {
        let b2: Vec<IVec> = b.iter().filter(|v| &v[..r] == u).map(|v| v[r..].to_vec()).collect();
        let (ok, defect) = if b2.len() == pi2l.len() { validate_triple(&tri.r2, &b2, &pi2l)? } else { (false, f64::INFINITY) };
        second.push((u.clone(), ok, defect));
    }
    Ok(SubTripleCheck { first, second })
}

/// Applies an integer matrix to every vector.
pub(crate) fn map_all(m: &IntMatrix, vs: &[IVec]) -> Result<Vec<IVec>> {
    vs.iter().map(|v| m.mul_vec(v)).collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::triangular;
    use crate::zeroset::Grade;

    fn m(rows: Vec<Vec<i64>>) -> IntMatrix {
        IntMatrix::new(rows).unwrap()
    }

    #[test]
    fn triangular_needs_no_conjugation() {
        let t = triangular();
        let tri = triangularize(t.r(), &[vec![1, 0]]).unwrap();
        assert!(tri.record.m.is_identity());
        assert_eq!(tri.r1, IntMatrix::scalar(4));
        assert_eq!(tri.r2, IntMatrix::scalar(2));
        assert_eq!(tri.c, vec![vec![1]]);
    }

    #[test]
    fn full_or_zero_subspace_is_rejected() {
        let r = m(vec![vec![4, 0], vec![1, 2]]);
        assert!(matches!(triangularize(&r, &[vec![1, 0], vec![0, 1]]), Err(Error::NotProper)));
        assert!(matches!(triangularize(&r, &[]), Err(Error::NotProper)));
        assert!(matches!(triangularize(&r, &[vec![0, 1]]), Err(Error::NotInvariant)));
    }

    #[test]
    fn permuted_matrix_is_recovered() {
        // P T P^{-1} with T = [[4,0],[1,2]] and P the swap: R^T keeps the second axis.
        let r = m(vec![vec![2, 1], vec![0, 4]]);
        let tri = triangularize(&r, &[vec![0, 1]]).unwrap();
        let mm = tri.m().unwrap();
        assert_eq!(mm.det().abs(), BigInt::from(1));
        assert_eq!(tri.r1, IntMatrix::scalar(4));
        assert_eq!(tri.r2, IntMatrix::scalar(2));
        assert_eq!(tri.r_tilde.get(0, 1), 0);
        // Exact check of M R M^{-1}.
        let back = mm.to_q().mul(&r.to_q()).mul(&tri.record.m_inv);
        assert_eq!(back, tri.r_tilde.to_q());
    }

    #[test]
    fn normalize_keeps_injective_sets() {
        let t = triangular();
        let l = normalize_l(t.r(), t.b(), &t.l, 1).unwrap();
        assert_eq!(l, t.l);
        let pi2: BTreeSet<IVec> = l.iter().map(|v| v[1..].to_vec()).collect();
        assert_eq!(pi2, [vec![0], vec![1]].into_iter().collect());
    }

    #[test]
    fn normalize_repairs_a_collision() {
        let t = triangular();
        // (0,1) moved to (0,1) + R^T (0,1) = (1,3): same class mod R^T, pi2 collides with 1 mod 2.
        let mut l = t.l.clone();
        l[2] = vec![1, 3];
        assert!(validate_triple(t.r(), t.b(), &l).unwrap().0);
        assert!(!pi2_injective(t.r(), &l, 1).unwrap());
        let fixed = normalize_l(t.r(), t.b(), &l, 1).unwrap();
        assert!(pi2_injective(t.r(), &fixed, 1).unwrap());
        // (1,3) now represents its class; (2,1) moves by R^T (0,-1) to (3,3).
        assert_eq!(fixed[2], vec![1, 3]);
        assert_eq!(fixed[3], vec![3, 3]);
    }

    fn brute_gamma(r2: i64, y0: (i64, i64), period: usize, range: i64) -> Vec<i64> {
        // x (r2^{j-1} y0) in Z for j = 1..period.
        (-range..=range)
            .filter(|&x| {
                let mut num = y0.0;
                (0..period).all(|_| {
                    let ok = (x * num) % y0.1 == 0;
                    num *= r2;
                    ok
                })
            })
            .collect()
    }

    #[test]
    fn triangular_decomposition() {
        let t = triangular();
        let tri = triangularize(t.r(), &[vec![1, 0]]).unwrap();
        let y0 = RatVec::from_ints(&[1], 3);
        let form = decompose(&tri, t.b(), &y0, 2, Grade::Exact).unwrap();
        assert_eq!(form.q, vec![vec![3]]);
        let oracle = brute_gamma(2, (1, 3), 2, 20);
        assert_eq!(oracle, (-20..=20).filter(|x| x % 3 == 0).collect::<Vec<_>>());
        assert_eq!(form.n1(), 2);
        for g in &form.digits {
            assert_eq!(g.v, vec![0]);
            assert_eq!(g.c, vec![vec![0], vec![1]]);
        }
        assert_eq!(form.r2_tilde, IntMatrix::scalar(2));
        let mut rebuilt = form.reconstruct().unwrap();
        rebuilt.sort();
        let mut b = t.b().to_vec();
        b.sort();
        assert_eq!(rebuilt, b);
        let subs = check_subtriples(&tri, t.b(), &t.l).unwrap();
        assert!(subs.all_valid());
        assert_eq!(fiber_dual(&t.l, 1, &[0]), vec![vec![0], vec![2]]);
    }

    #[test]
    fn rectangle_decomposition() {
        let r = IntMatrix::diag(&[2, 2]);
        let b = vec![vec![0, 0], vec![0, 3], vec![1, 0], vec![1, 3]];
        let tri = triangularize(&r, &[vec![1, 0]]).unwrap();
        let form = decompose(&tri, &b, &RatVec::from_ints(&[1], 3), 2, Grade::Exact).unwrap();
        assert_eq!(form.q, vec![vec![3]]);
        assert_eq!(brute_gamma(2, (1, 3), 2, 20), (-20..=20).filter(|x| x % 3 == 0).collect::<Vec<_>>());
    }

    #[test]
    fn incomplete_fiber_is_rejected() {
        let t = triangular();
        let tri = triangularize(t.r(), &[vec![1, 0]]).unwrap();
        let b = vec![vec![0, 0], vec![0, 3], vec![1, 0]];
        assert!(matches!(decompose(&tri, &b, &RatVec::from_ints(&[1], 3), 2, Grade::Exact), Err(Error::NotCompleteReps { u }) if u == vec![1]));
        let b = vec![vec![0, 0], vec![0, 2], vec![1, 0], vec![1, 3]];
        assert!(matches!(decompose(&tri, &b, &RatVec::from_ints(&[1], 3), 2, Grade::Exact), Err(Error::NotCompleteReps { .. })));
    }

    #[test]
    fn integral_cycle_point_gives_trivial_gamma() {
        let t = triangular();
        let tri = triangularize(t.r(), &[vec![1, 0]]).unwrap();
        assert!(matches!(decompose(&tri, t.b(), &RatVec::integer(&[1]), 1, Grade::Exact), Err(Error::GammaFullOrTrivial { .. })));
    }
}
