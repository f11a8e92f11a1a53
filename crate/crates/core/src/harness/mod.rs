//! Random instance generators, a Monte Carlo intervention oracle, fixtures with
//! known causal structure, and the composition and reversibility counterexamples.

pub mod counterexamples;
pub mod fixtures;
pub mod random;
pub mod theorems;

pub use counterexamples::{
    composition_check, composition_counterexample, reversibility_check, reversibility_counterexample,
    CompositionCheck, ReversibilityWitness,
};
pub use random::{
    monte_carlo_intervention, random_causal_space, random_intervention, random_mechanism, random_scm,
    KernelStyle, MeasureShape, RandomSpaceConfig,
};
