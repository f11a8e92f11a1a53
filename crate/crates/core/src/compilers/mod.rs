//! Compilers from structural causal models and potential-outcome tables to
//! causal spaces.

mod po;
mod scm;

pub use po::{
    ate, compile_po, MaskEntry, PoSpec, PoVariable, Provenance, SpecificationMask, PO_COVARIATE, PO_OUTCOME,
    PO_TREATMENT,
};
pub(crate) use po::conditional_or_marginal;
pub use scm::{compile_resolved, compile_scm, ResolvedScm, ScmSpec, ScmVariable};
