use thiserror::Error;

use crate::digraph::Subgraph;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a digraph on {n} vertices")]
    InvalidVertex { vertex: usize, n: usize },

    #[error("digraphs are limited to {limit} vertices, got {n}")]
    TooManyVertices { n: usize, limit: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate arc {0} -> {1}")]
    DuplicateArc(usize, usize),

    #[error("vertex {vertex} is not a member of the given set")]
    NotInSet { vertex: usize },

    #[error("vertex {vertex} is not a root of the breakdown sequence")]
    NotARoot { vertex: usize },

    #[error("exact search over {size} vertices exceeds the oracle limit of {limit}")]
    OracleLimitExceeded { size: usize, limit: usize },

    #[error("step rooted at {root} has a non-empty neighbourhood")]
    NonEmptyStep { root: usize },

    #[error("step rooted at {root} is neither in Q nor dominated by Q")]
    Unclassifiable { root: usize },

    #[error("invalid breakdown sequence: {0}")]
    InvalidSequence(String),

    #[error("no vertex of the residual digraph satisfies the source-emergence bound")]
    AxiomViolation(Box<Subgraph>),

    #[error("digraph has no arcs")]
    ArclessGraph,

    #[error("digraph is not source-free")]
    NotSourceFree,

    #[error("set is not a constructive quasi-kernel for this breakdown sequence")]
    NotConstructive,

    #[error("n = {n} exceeds the cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
}
