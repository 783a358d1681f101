use thiserror::Error;

/// Errors raised by graph construction, partitioning and bound evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge ({u}, {v}) has an endpoint outside [0, {n})")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("self-loop at vertex {0} in a simple graph")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1}) in a simple graph")]
    DuplicateEdge(usize, usize),
    #[error("operation requires a simple graph (loops: {loops}, parallel edges: {multi})")]
    NotSimple { loops: usize, multi: usize },
    #[error("vertex sets overlap")]
    OverlappingSets,
    #[error("vertex set is empty")]
    EmptySet,
    #[error("vertex set does not match the graph order ({expected} vs {actual})")]
    UniverseMismatch { expected: usize, actual: usize },
    #[error("graph has no edges")]
    NoEdges,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("graph has {n} vertices; the exhaustive oracle supports at most {max}")]
    TooLarge { n: usize, max: usize },
    #[error("graph is not a subgraph of the reference graph: {0}")]
    NotSubgraph(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no admissible partner for vertex {v} within the window ending at {window_end}")]
    WindowExhausted { v: usize, window_end: usize },
    #[error("matching is not perfect: {0} vertices unmatched")]
    MatchingNotPerfect(usize),
    #[error("matching is invalid: {0}")]
    InvalidMatching(String),
    #[error("short loop between the graph and the matching: {0:?}")]
    ShortLoop(Vec<usize>),
    #[error("weights must be non-increasing (violated at index {0})")]
    UnsortedWeights(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Chung-Lu weight {w} at vertex {v} violates max w^2 < mean(w) * n")]
    WeightTooLarge { v: usize, w: f64 },
    #[error("degree sequence is not graphical")]
    NotGraphical,
    #[error("no simple pairing found after {0} attempts")]
    PairingFailed(usize),
    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),
    #[error("quadrature did not converge for k = {0}")]
    IntegrationFailed(usize),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
