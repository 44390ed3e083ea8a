//! Numerical tolerances shared by the formulas, the threshold solver and the
//! property tests.

/// Every tolerance the crate compares against, in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Floating-point comparisons of Schmidt values, probabilities and sums.
    pub comparison: f64,
    /// Absolute width at which threshold bisection stops.
    pub bisection_width: f64,
    /// Maximum residual `|f(r) - 1/2|` accepted at a solved threshold.
    pub bisection_residual: f64,
    /// Hard cap on bisection iterations.
    pub bisection_max_iterations: usize,
    /// Number of grid points used to check monotonicity before bisecting.
    pub monotonicity_grid: usize,
    /// Allowed distance between the enforced and the sampled disorder mean.
    pub mean_enforcement: f64,
    /// Iteration cap for the shift-and-clip mean enforcement.
    pub mean_enforcement_iterations: usize,
}

pub const TOLERANCES: Tolerances = Tolerances {
    comparison: 1e-12,
    bisection_width: 1e-9,
    bisection_residual: 1e-8,
    bisection_max_iterations: 60,
    monotonicity_grid: 101,
    mean_enforcement: 1e-6,
    mean_enforcement_iterations: 100,
};

/// Clamp `x` into `[lo, hi]` when it strays outside by at most the comparison
/// tolerance. Values further out are returned unchanged so callers can reject
/// them.
pub(crate) fn snap_into(x: f64, lo: f64, hi: f64) -> f64 {
    let tol = TOLERANCES.comparison;
    if x < lo && x >= lo - tol {
        lo
    } else if x > hi && x <= hi + tol {
        hi
    } else {
        x
    }
}

/// `a == b` within the comparison tolerance.
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOLERANCES.comparison
}
