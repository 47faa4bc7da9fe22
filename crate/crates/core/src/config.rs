//! Tolerances, caps and search windows.
//!
//! Every numeric threshold used by the library lives here. The structs at
//! the bottom group them per pipeline stage and are what the CLI overrides.

use serde::{Deserialize, Serialize};

/// Margin around 1 for eigenvalue moduli in the expansiveness test.
pub const EXPANSIVE_MARGIN: f64 = 1e-9;

/// Maximum entry of `H*H - I` accepted for a Hadamard triple.
pub const HADAMARD_DEFECT_TOL: f64 = 1e-10;

/// Largest digit tower `N^k` materialized by `tower` and `discrete_approximant`.
pub const TOWER_CAP: u128 = 1 << 20;

/// Contraction target: the product for `mu_hat` stops once `|(R^T)^{-T} xi|_inf < eta`.
///
/// The tail factor then differs from 1 by at most `2 pi max|b|_1 eta` times a
/// geometric constant, which keeps depth-stability well below `1e-9`.
pub const MU_HAT_ETA: f64 = 1e-12;

/// Hard cap on the number of mask factors in one `mu_hat` evaluation.
pub const MU_HAT_MAX_DEPTH: usize = 128;

/// Largest enumerated spectrum `|Lambda_K|`.
pub const ENUMERATION_CAP: u128 = 1 << 16;

/// Half-width `W` of the integer shift window `[-W, W]^d` used by the Lipschitz cover.
pub const SHIFT_WINDOW: i64 = 8;

/// First cover radius tried; later radii halve it.
pub const COVER_EPS_START: f64 = 0.25;

/// Smallest cover radius tried before giving up.
pub const COVER_EPS_MIN: f64 = 1.0 / 4096.0;

/// The cover stops refining once `delta0` reaches this fraction of the squared worst grid value.
pub const COVER_ACCEPT_RATIO: f64 = 0.5;

/// Largest number of grid points in one cover.
pub const COVER_MAX_POINTS: usize = 1 << 18;

/// Window `K` for zero-set certificates, `[-K, K]^d`.
pub const ZERO_WINDOW: i64 = 10;

/// Maximal level `J` searched for a vanishing mask factor.
pub const ZERO_LEVELS: usize = 30;

/// Threshold `tau` on `max_k |mu_hat(xi + k)|` at snapped scan candidates.
pub const SCAN_TAU: f64 = 1e-7;

/// Grid step `h` of the zero-set scan.
pub const SCAN_STEP: f64 = 1.0 / 256.0;

/// Largest denominator used when snapping scan points to rationals.
pub const SCAN_DENOMINATOR: i64 = 64;

/// Largest number of candidates kept by the scan.
pub const SCAN_MAX_CANDIDATES: usize = 64;

/// Largest cycle period searched.
pub const MAX_PERIOD: usize = 12;

/// Largest `|det((R^T)^m - I)|` enumerated for one period.
pub const CYCLE_POINTS_CAP: u128 = 1 << 17;

/// Numeric zero test for a mask value when no exact test applies.
pub const MASK_ZERO_TOL: f64 = 1e-12;

/// A transition is possible when `u_B` exceeds this value.
pub const TRANSITION_TOL: f64 = 1e-12;

/// Pass threshold for pairwise `|mu_hat(lambda - lambda')|`.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// Slack above 1 allowed for Bessel sums.
pub const BESSEL_SLACK: f64 = 1e-6;

/// Completeness sweeps must reach this value.
pub const JP_ACCEPT: f64 = 0.95;

/// Sweeps that stay below this value reject a product candidate outright.
pub const JP_STALL: f64 = 0.9;

/// Largest `N^n` handled by dense eigen-decomposition in `frames`.
pub const DENSE_FRAME_CAP: usize = 4096;

/// Largest `N^n` handled by the matrix-free path.
pub const FRAME_CAP: u128 = 1 << 16;

/// Relative tolerance of the matrix-free power iteration.
pub const POWER_TOL: f64 = 1e-9;

/// Iteration limit of the matrix-free power iteration.
pub const POWER_MAX_ITER: usize = 10_000;

/// Default number of swap proposals in subset selection.
pub const SELECT_BUDGET: usize = 2_000;

/// Monte-Carlo sample count for the T-SOSC check.
pub const TSOSC_SAMPLES: usize = 100_000;

/// Number of query points of `T(R, B)` in the T-SOSC check.
pub const TSOSC_QUERIES: usize = 2_000;

/// Lower bound on the interior margin of the T-SOSC check (`4^-8`).
pub const TSOSC_MARGIN: f64 = 1.0 / 65536.0;

/// Interior witnesses needed before the T-SOSC check reports `Holds`.
pub const TSOSC_MIN_WITNESSES: usize = 10;

/// Points of a spectrum used by the pipelines' completeness sweeps.
pub const SPECTRUM_BUDGET: usize = 4096;

/// Parameters of the shift cover and of the level construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverConfig {
    pub window: i64,
    pub eps_start: f64,
    pub eps_min: f64,
    pub max_points: usize,
    pub cap: u128,
}

impl Default for CoverConfig {
    fn default() -> Self {
        Self {
            window: SHIFT_WINDOW,
            eps_start: COVER_EPS_START,
            eps_min: COVER_EPS_MIN,
            max_points: COVER_MAX_POINTS,
            cap: ENUMERATION_CAP,
        }
    }
}

/// Parameters of the zero-set scan, certificates and cycle search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZeroSetConfig {
    pub window: i64,
    pub levels: usize,
    pub tau: f64,
    pub step: f64,
    pub denominator: i64,
    pub max_candidates: usize,
    pub max_period: usize,
    pub cycle_points_cap: u128,
}

impl Default for ZeroSetConfig {
    fn default() -> Self {
        Self {
            window: ZERO_WINDOW,
            levels: ZERO_LEVELS,
            tau: SCAN_TAU,
            step: SCAN_STEP,
            denominator: SCAN_DENOMINATOR,
            max_candidates: SCAN_MAX_CANDIDATES,
            max_period: MAX_PERIOD,
            cycle_points_cap: CYCLE_POINTS_CAP,
        }
    }
}

/// Parameters of the product-spectrum sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Grid points per axis of the `xi` grid in `[0,1)^d`.
    pub grid: usize,
    /// Half-width of the fiber box, in the fiber's own units.
    pub fiber_radius: f64,
    /// Spectrum points used for the base factor.
    pub budget: usize,
    pub accept: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { grid: 4, fiber_radius: 16.0, budget: SPECTRUM_BUDGET, accept: JP_ACCEPT }
    }
}

/// Tree depth used by the top-level spectrum pipeline.
pub const PIPELINE_DEPTH: usize = 3;

/// Parameters of the full spectrum pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Requested depth of corrected trees; lowered when a level would exceed the cap.
    pub depth: usize,
    pub cover: CoverConfig,
    pub zero: ZeroSetConfig,
    pub sweep: SweepConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { depth: PIPELINE_DEPTH, cover: CoverConfig::default(), zero: ZeroSetConfig::default(), sweep: SweepConfig::default() }
    }
}
