//! Distributionally robust expectations over integral-probability-metric
//! balls on finite sample spaces.
//!
//! The crate computes worst-case expectations `sup_{Q : d_F(Q, P) <= eps} E_Q[h]`
//! for a range of function classes `F`, the penalty functionals that give the
//! same value in closed or LP form, and the critic and f-GAN quantities built
//! on them. Every LP result carries a duality certificate; every iterative
//! result carries an explicit sandwich gap.

pub mod cli;
pub mod critic;
pub mod domain;
pub mod dro;
pub mod error;
pub mod gan;
pub mod ipm;
pub mod linalg;
pub mod penalties;
pub mod solvers;
pub mod tolerances;

pub use domain::{
    discretize_structured_class, lipschitz_constant, symmetrize_class, ClassKind,
    DiscreteDistribution, Edge, FunctionClass, FunctionVec, MetricEdge, SampleSpace, Symmetrized,
    ZetaBall, ZetaFn,
};
pub use error::{Error, Result};
pub use tolerances::Tolerances;
