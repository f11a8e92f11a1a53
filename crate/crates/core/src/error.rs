use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Subset, atom or shape does not fit the space it is used with.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// Conditioning on an atom of zero mass; conditional versions are not defined there.
    #[error("conditioning on a null atom {atom:?} of subset {{{subset}}} (mass {mass:e})")]
    NullSet {
        subset: String,
        atom: Vec<usize>,
        mass: f64,
    },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("structural causal model has a cycle: {}", trace.join(" -> "))]
    Cyclic { trace: Vec<String> },

    #[error("structural causal model is not in topological order: {0}")]
    NotTopological(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular conditioning block (smallest eigenvalue {0:e})")]
    Singular(f64),

    #[error("parse error: {0}")]
    Parse(String),
}
