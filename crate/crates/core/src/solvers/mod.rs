//! Numerical kernels used by the higher-level modules.

mod lp;
mod quadratic;
mod scalar;
mod simplex_proj;

pub use lp::{solve_lp, solve_lp_with, LpCertificate, LpProblem, LpSolution, LpStatus, MAX_DIM};
pub use quadratic::{maximize_concave_quadratic_over_simplex, QuadraticSolution};
pub use scalar::minimize_scalar_convex;
pub use simplex_proj::project_simplex;

pub(crate) use quadratic::ascend as quadratic_ascent;
