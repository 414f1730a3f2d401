use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("edge ({u}, {v}) has an endpoint outside 0..{n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("inadmissible family parameters: {0}")]
    Family(String),

    #[error("edge ({u}, {v}) has degree sum {sum} > m = {m}")]
    AssumptionViolated {
        u: usize,
        v: usize,
        sum: usize,
        m: usize,
    },

    #[error("node {0} given twice where two distinct nodes are required")]
    SameNode(usize),

    #[error("node {node} out of range for {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("linear system is singular")]
    Singular,

    #[error("invalid chain matrix: {0}")]
    InvalidChain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("number of trials must be positive")]
    NoTrials,

    #[error("negative transition entry {value} at row {row}")]
    NegativeEntry { row: usize, value: f64 },

    #[error("schedule member {index} rejected: {reason}")]
    Schedule { index: usize, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
