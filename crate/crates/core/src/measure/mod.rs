//! Finite product measurable spaces and the measures and kernels living on them.
//!
//! Every component carries the full power set of its outcomes, so an event of
//! `ℋ_S` is just a set of atoms of `Ω_S`. Distributions and kernels are dense
//! tensors flattened row-major over their components in ascending order.

mod dist;
mod kernel;
mod space;

pub(crate) use dist::normalize_weights;
pub use dist::{product, Dist, Event};
pub use kernel::{bind, DeterminismBreach, Kernel};
pub use space::{
    component_cap, AtomIndex, Component, FiniteProductSpace, SubsetMask, DEFAULT_MAX_COMPONENTS,
    MAX_COMPONENTS_ENV,
};

/// Tolerance for all equality-of-measure comparisons.
pub const EPS_NORM: f64 = 1e-9;
/// Weight vectors within this distance of summing to one are renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-6;
