use thiserror::Error;

/// Errors raised by graph construction, the algorithms and the studies.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("edge probability {0} is outside (0, 1]")]
    EdgeProbability(f64),
    #[error("weight set must be non-empty and contain only positive weights")]
    WeightSet,
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("invalid edge ({0}, {1}): {2}")]
    InvalidEdge(usize, usize, &'static str),
    #[error("graph has no source vertex")]
    MissingSource,
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("graph with {n} vertices exceeds the enumeration limit of {limit}")]
    EnumerationLimit { n: usize, limit: usize },
    #[error("strict mode requires a directed graph")]
    UndirectedInput,
    #[error("distribution row {row} is not stochastic: {reason}")]
    NotStochastic { row: usize, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse weight {0:?}")]
    ParseWeight(String),
    #[error("method {method} is not applicable to {task} graphs")]
    MethodTask { method: &'static str, task: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;
