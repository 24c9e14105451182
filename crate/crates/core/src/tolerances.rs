use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the crate, in one place.
///
/// The defaults are the values the test suites are written against; the CLI
/// lets a config file override individual fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Smallest admissible simplex pivot magnitude.
    pub lp_pivot: f64,
    /// Reduced-cost threshold for declaring an LP basis optimal.
    pub lp_optimality: f64,
    /// Phase-one objective cutoff separating feasible from infeasible.
    pub lp_phase_one: f64,
    /// Primal feasibility tolerance, scaled by `1 + |rhs|_inf`.
    pub lp_feasibility: f64,
    /// Pivot budget before the solver gives up.
    pub lp_max_pivots: usize,
    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    pub lp_degenerate_streak: usize,
    /// Frank-Wolfe gap target of the concave quadratic solver.
    pub quadratic_gap: f64,
    /// Iteration cap of the concave quadratic solver.
    pub quadratic_max_iter: usize,
    /// Golden-section iterations for the dual multiplier search.
    pub golden_iterations: usize,
    /// Eigenvalues below this are treated as zero.
    pub eigen_cutoff: f64,
    /// Absolute slack allowed in the metric triangle inequality.
    pub triangle: f64,
    /// Absolute slack allowed when checking probability weights sum to one.
    pub weight_sum: f64,
    /// Sandwich-gap target of the primal-dual penalty solver.
    pub iterative_gap: f64,
    /// Iteration cap of the primal-dual penalty solver.
    pub iterative_max_iter: usize,
    /// Residual threshold for identities computed entirely by exact LPs.
    pub exact_check: f64,
    /// Residual threshold for identities involving an iterative solve.
    pub iterative_check: f64,
    /// Ball-membership slack for reported worst-case distributions.
    pub ball_feasibility: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lp_pivot: 1e-11,
            lp_optimality: 1e-10,
            lp_phase_one: 1e-9,
            lp_feasibility: 1e-9,
            lp_max_pivots: 200_000,
            lp_degenerate_streak: 50,
            quadratic_gap: 1e-10,
            quadratic_max_iter: 200_000,
            golden_iterations: 60,
            eigen_cutoff: 1e-10,
            triangle: 1e-12,
            weight_sum: 1e-12,
            iterative_gap: 1e-7,
            iterative_max_iter: 400_000,
            exact_check: 1e-6,
            iterative_check: 5e-4,
            ball_feasibility: 1e-7,
        }
    }
}

impl Tolerances {
    /// Identity/alignment threshold for a result that was (not) exact.
    pub fn check_for(&self, exact: bool) -> f64 {
        if exact {
            self.exact_check
        } else {
            self.iterative_check
        }
    }
}
