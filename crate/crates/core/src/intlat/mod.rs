//! Exact integer and rational linear algebra.

pub mod hnf;
pub mod lattice;
pub mod mat;
pub mod poly;
pub mod ratvec;
pub mod reduce;
pub mod residue;

pub use hnf::{hermite_normal_form, is_unimodular, Hnf};
pub use lattice::{rational_kernel, Lattice, LatticeSummary};
pub use mat::{IVec, IntMatrix, Mat, QMat, ZMat};
pub use poly::{char_poly, is_expansive, rational_factors, Poly};
pub use ratvec::RatVec;
pub use reduce::{reduce_to_full, smallest_invariant_lattice, translate_to_origin, ConjugationRecord, Reduction};
pub use residue::{complete_representatives, is_simple_digit_set, ResidueSystem};

/// Dual of a full-rank lattice.
pub fn dual_lattice(l: &Lattice) -> crate::error::Result<Lattice> {
    l.dual()
}
