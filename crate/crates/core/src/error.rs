//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by graph construction, rate calculators, the exact
/// solver and the simulator.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("node subset must not be empty")]
    EmptySubset,

    #[error("graph has {n} nodes, exceeding the state-space enumeration cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("graph is not chordal")]
    NotChordal,

    #[error("graph is not acyclic")]
    NotAcyclic,

    #[error("ordering is not a permutation of the graph nodes")]
    NotAPermutation,

    #[error("ordering is not a perfect elimination ordering of the graph")]
    InvalidPeo,

    #[error("invalid clique tree: {0}")]
    InvalidCliqueTree(String),

    #[error("nodes {0:?} do not form a clique")]
    NotAClique(Vec<usize>),

    #[error("throughput vector is not achievable: {context} (margin {margin:.3e})")]
    Unachievable { margin: f64, context: String },

    #[error("throughput vector is locally unachievable at node {node} (margin {margin:.3e})")]
    LocallyUnachievable { node: usize, margin: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("iteration cap of {cap} exceeded (residual {residual:.3e})")]
    IterationCap { cap: u64, residual: f64 },

    #[error("failed to parse input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
