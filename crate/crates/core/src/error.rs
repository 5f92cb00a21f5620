use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("edge {edge}: weight {weight} outside the open interval (0,1)")]
    WeightOutOfRange { edge: usize, weight: String },

    #[error("rotation system inconsistent: {0}")]
    RotationInconsistent(String),

    #[error("graph is not connected (vertex {0} unreachable from 0)")]
    Disconnected(usize),

    #[error("rotation system is not planar: |V|-|E|+|F| = {0}, expected 2")]
    EulerViolation(i64),

    #[error("declared boundary does not match any face of the embedding: {0}")]
    BoundaryMismatch(String),

    #[error("vertex {0} is not on the outer boundary")]
    NotBoundary(usize),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("ordering violation: {0}")]
    OrderingViolation(String),

    #[error("infeasible source set: S_A = 0 for A = {0:?}")]
    InfeasibleSources(Vec<usize>),

    #[error("edge weight {0} is not Pythagorean (1 - x^2 has no rational square root)")]
    NonPythagorean(String),

    #[error("capacity exceeded: {what} (limit {limit})")]
    Capacity { what: String, limit: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn capacity(what: impl Into<String>, limit: impl ToString) -> Self {
        Error::Capacity {
            what: what.into(),
            limit: limit.to_string(),
        }
    }

    /// Stable process exit code contract: 2 for input errors, 3 for capacity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity { .. } => 3,
            _ => 2,
        }
    }
}
