//! Sample spaces, distributions, functions and function classes.
//!
//! All values are immutable after construction and share their space through
//! an [`Arc`](std::sync::Arc). Point labels are opaque; every computation works
//! on indices.

mod class;
mod discretize;
mod distribution;
mod space;

pub use class::{
    lipschitz_constant, symmetrize_class, ClassKind, FunctionClass, Symmetrized, ZetaBall, ZetaFn,
};
pub use discretize::discretize_structured_class;
pub use distribution::{DiscreteDistribution, FunctionVec};
pub use space::{Edge, MetricEdge, SampleSpace};

pub(crate) use class::check_same_space;
pub(crate) use distribution::dot;
