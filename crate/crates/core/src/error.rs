use thiserror::Error;

use crate::trigraph::VertexId;

/// Errors raised while reading DIMACS, sequence or expression text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("cannot contract vertex {0} with itself")]
    SelfContraction(VertexId),
    #[error("vertices {0} and {1} lie on different sides")]
    CrossSide(VertexId, VertexId),
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("bags do not partition the vertex set: {0}")]
    NotAPartition(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("step {step}: {reason}")]
    Replay { step: usize, reason: String },
    #[error("sequence is not a maximal bipartite sequence: {0}")]
    NotMaximalBipartite(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("graph has {0} vertices; brute force is limited to {1}")]
    TooLarge(usize, usize),
    #[error("not a subdivided clique: {0}")]
    NotSubdividedClique(String),
    #[error("malformed clique-width expression: {0}")]
    MalformedExpression(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver command is empty")]
    EmptyCommand,
    #[error("could not run solver `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("solver `{command}` failed: {detail}")]
    Crashed { command: String, detail: String },
    #[error("io error while talking to the solver: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("graph sides are not a valid bipartition: {0}")]
    NotBipartite(String),
    #[error("model is inconsistent with the encoding: {0}")]
    Decode(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BwmcError {
    #[error("ones budget must be non-negative, got {0}")]
    NegativeBudget(i64),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("step {step} is inconsistent with the current trigraph: {reason}")]
    InconsistentStep { step: usize, reason: String },
    #[error("profile region of {0} vertices exceeds the supported 64")]
    RegionTooLarge(usize),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("formula has {0} variables; the oracle is limited to {1}")]
    TooManyVariables(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("{0}")]
    Invalid(String),
}
