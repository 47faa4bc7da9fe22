use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("size mismatch: {left} digits against {right} dual digits")]
    SizeMismatch { left: usize, right: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("an eigenvalue modulus ({modulus}) lies within {margin:e} of 1")]
    AmbiguousSpectrum { modulus: f64, margin: f64 },

    #[error("matrix is not expansive")]
    NotExpansive,

    #[error("digit set is not simple: {0:?} and {1:?} are congruent")]
    NotSimple(Vec<i64>, Vec<i64>),

    #[error("not a Hadamard triple (defect {defect:e})")]
    NotHadamard { defect: f64 },

    #[error("residue collision between {0:?} and {1:?}")]
    ResidueCollision(Vec<i64>, Vec<i64>),

    #[error("{what} needs {requested} elements but the cap is {cap}")]
    CapExceeded { what: &'static str, requested: u128, cap: u128 },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("lattice is not of full rank")]
    RankDeficient,

    #[error("periodic zero set is non-empty (certified point {witness})")]
    ZeroSetNonEmpty { witness: String },

    #[error("no integer shift in the window keeps |mu_hat| away from 0 near x = {x:?}")]
    NoShiftFound { x: Vec<f64> },

    #[error("dimension {0} is not supported by this operation")]
    DimensionUnsupported(usize),

    #[error("subspace is not invariant under the matrix")]
    NotInvariant,

    #[error("subspace must be proper and non-zero")]
    NotProper,

    #[error("fiber digits over u = {u:?} are not a complete residue system")]
    NotCompleteReps { u: Vec<i64> },

    #[error("lattice Gamma has |det Q| = {det}, contradicting a non-empty zero set")]
    GammaFullOrTrivial { det: String },

    #[error("quasi-product data are inconsistent: {0}")]
    Inconsistent(String),

    #[error("no beta candidate passed the completeness sweep (best minimum {best_min})")]
    NoBetaAccepted { best_min: f64 },

    #[error("epsilon = {eps} at level {level} is not below 1")]
    EpsilonTooLarge { level: usize, eps: f64 },

    #[error("digits cannot be extended to a complete residue system")]
    DigitsNotExtendable,

    #[error("nothing to render: the field is empty")]
    EmptyField,

    #[error("no invariant cycle found with period <= {max_period} and at most {max_points} points per period")]
    NotFound { max_period: usize, max_points: u128 },

    #[error("undecided: {0}")]
    Undecided(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit code: 2 invalid input, 3 mathematical refusal, 4 inconclusive, 5 cap exceeded.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::DimensionMismatch(_)
            | Error::SizeMismatch { .. }
            | Error::Singular
            | Error::AmbiguousSpectrum { .. }
            | Error::NotExpansive
            | Error::EmptyField
            | Error::Io(_) => 2,
            Error::Undecided(_) | Error::NotFound { .. } | Error::NoBetaAccepted { .. } | Error::NoShiftFound { .. } => 4,
            Error::CapExceeded { .. } | Error::Overflow(_) => 5,
            _ => 3,
        }
    }
}
