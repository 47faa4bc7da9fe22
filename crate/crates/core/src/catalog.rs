//! Small triples used by tests, the CLI and the C interface.

use crate::intlat::IntMatrix;
use crate::triples::{AffinePair, HadamardTriple};

/// `(4, {0,2}, {0,1})`: the quarter Cantor measure.
pub fn quarter_cantor() -> HadamardTriple {
    HadamardTriple::from_rows(vec![vec![4]], vec![vec![0], vec![2]], vec![vec![0], vec![1]]).expect("valid triple")
}

/// A planar triple with `Z[R,B] = Z^2` and a non-empty periodic zero set.
pub fn triangular() -> HadamardTriple {
    HadamardTriple::from_rows(
        vec![vec![4, 0], vec![1, 2]],
        vec![vec![0, 0], vec![0, 3], vec![1, 0], vec![1, 3]],
        vec![vec![0, 0], vec![2, 0], vec![0, 1], vec![2, 1]],
    )
    .expect("valid triple")
}

/// `(r, {0, .., r-1}, {0, .., r-1})`: Lebesgue measure on `[0,1]`.
pub fn lebesgue(r: i64) -> HadamardTriple {
    let d: Vec<Vec<i64>> = (0..r).map(|x| vec![x]).collect();
    HadamardTriple::from_rows(vec![vec![r]], d.clone(), d).expect("valid triple")
}

/// `(2, {0,2})`: uniform measure on `[0,2]`. Not part of any integer Hadamard triple.
pub fn stretched_interval() -> AffinePair {
    AffinePair::new(IntMatrix::scalar(2), vec![vec![0], vec![2]]).expect("expansive pair")
}

/// `(3, {0,2})`: the middle-third Cantor measure.
pub fn middle_third() -> AffinePair {
    AffinePair::new(IntMatrix::scalar(3), vec![vec![0], vec![2]]).expect("expansive pair")
}
