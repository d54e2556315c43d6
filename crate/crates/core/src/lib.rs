//! Quasi-kernels of finite digraphs, breakdown sequences, and the per-instance
//! checks behind a small-quasi-kernel search.
//!
//! A quasi-kernel is an independent vertex set from which every vertex is
//! reachable in at most two arcs. The crate provides exact predicates, the
//! inductive constructions with full traces, exhaustive oracles for small
//! graphs, and the digraph search spaces used by campaign runners.

pub mod breakdown;
pub mod conjecture;
pub mod digraph;
pub mod error;
pub mod genspace;
pub mod quasikernel;
mod subsets;

pub use breakdown::{BreakdownSequence, BreakdownStep, Rule};
pub use conjecture::{AxiomWitness, Check, Counterexample, RstDecomposition};
pub use digraph::{Digraph, Subgraph, Vertex, VertexSet};
pub use error::{Error, Result};
pub use genspace::ArcMask;
pub use quasikernel::{ConstructionTrace, Selector, StepKind};
