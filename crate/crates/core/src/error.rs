use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a graph needs at least one node")]
    NoNodes,
    #[error("{0} nodes requested, at most 64 are supported")]
    TooManyNodes(usize),
    #[error("node {node} out of range for a graph on {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("node count mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("round {round} out of range (trace has {len} rounds)")]
    RoundOutOfRange { round: usize, len: usize },
    #[error("invalid model parameters: {0}")]
    InvalidSpec(String),
    #[error("round {round} is not a member of the {family} family")]
    NotInFamily { round: usize, family: String },
    #[error("{what} is limited to n <= {max} (got {n})")]
    Guard { what: &'static str, n: usize, max: usize },
    #[error("objective not reached within {rounds} rounds")]
    ObjectiveNotReached { rounds: usize, final_product: Box<Graph> },
    #[error("the adversary can stall the objective forever from a reachable state")]
    Unbounded,
    #[error("memo table exceeded the memory cap of {cap} bytes")]
    MemoryBudgetExceeded { cap: usize },
    #[error("rounds graph: {0}")]
    RoundsGraph(String),
    #[error("sequence file: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
