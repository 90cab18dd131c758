use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("graph format error on line {line}: {message}")]
    GraphFormat { line: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("cannot parse number `{0}`")]
    InvalidNumber(String),

    #[error("merge set is empty")]
    EmptyMergeSet,

    #[error("source set is not a subset of the target set")]
    NotSuperset,

    #[error("state space has more than {limit} states")]
    StateSpaceExceeded { limit: usize },

    #[error("target is unreachable from the source")]
    UnreachableTarget,

    #[error("generating function diverges: |z * P(A,A)| >= 1")]
    DivergentDiagonal,

    #[error("edge probabilities are not uniform")]
    NonUniformProbabilities,

    #[error("power series degrees differ ({left} vs {right})")]
    DegreeMismatch { left: usize, right: usize },

    #[error("order violation: expected m >= n, got m = {m}, n = {n}")]
    OrderViolation { m: usize, n: usize },

    #[error("survival function increases at index {index}")]
    NonMonotoneCdf { index: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("graph is not a tree")]
    NotATree,

    #[error("{edges} edges exceed the enumeration limit of {limit}")]
    TooManyEdges { edges: usize, limit: usize },
}

impl Error {
    /// Stable machine-readable name, used in CLI error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::GraphFormat { .. } => "GraphFormat",
            Error::InvalidGraph(_) => "InvalidGraph",
            Error::UnknownVertex(_) => "UnknownVertex",
            Error::InvalidNumber(_) => "InvalidNumber",
            Error::EmptyMergeSet => "EmptyMergeSet",
            Error::NotSuperset => "NotSuperset",
            Error::StateSpaceExceeded { .. } => "StateSpaceExceeded",
            Error::UnreachableTarget => "UnreachableTarget",
            Error::DivergentDiagonal => "DivergentDiagonal",
            Error::NonUniformProbabilities => "NonUniformProbabilities",
            Error::DegreeMismatch { .. } => "DegreeMismatch",
            Error::OrderViolation { .. } => "OrderViolation",
            Error::NonMonotoneCdf { .. } => "NonMonotoneCDF",
            Error::Domain(_) => "DomainError",
            Error::NotATree => "NotATree",
            Error::TooManyEdges { .. } => "TooManyEdges",
        }
    }
}
