//! Causal spaces on finite product spaces.
//!
//! A causal space is a probability space `(Ω, ℋ, ℙ)` over a product of
//! components together with a causal kernel `K_S` for every subset `S` of the
//! components, describing the law of the whole system after `ℋ_S` is
//! intervened on. This crate provides the finite machinery ([`measure`],
//! [`causal`]), effect classification and sources ([`effects`]), compilers
//! from structural causal models and potential-outcome tables
//! ([`compilers`]), a closed-form linear-Gaussian counterpart ([`gaussian`]),
//! and random generators and counterexample fixtures ([`harness`]).

pub mod causal;
pub mod cli;
pub mod compilers;
pub mod effects;
pub mod error;
pub mod gaussian;
pub mod harness;
pub mod measure;

pub use error::{Error, Result};
