use thiserror::Error;

pub type Result<T, E = QsyncError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum QsyncError {
    #[error("wire mismatch: {left} vs {right}")]
    WireMismatch { left: String, right: String },

    #[error("diagram mismatch: {0}")]
    DiagramMismatch(String),

    #[error("invalid block profile: {0}")]
    InvalidBlocks(String),

    #[error("syntax error at {line}:{column}: {message}")]
    SyntaxError {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown primitive `{0}`")]
    UnknownPrimitive(String),

    #[error("unbound name `{0}`")]
    UnboundName(String),

    #[error("not a game (residual {residual:.3e})")]
    NotAGame { residual: f64 },

    #[error("graph is not irreflexive (residual {residual:.3e})")]
    NotIrreflexive { residual: f64 },

    #[error("invalid quantum graph: {0}")]
    InvalidGraph(String),

    #[error("invalid adjacency matrix: {0}")]
    InvalidAdjacency(String),

    #[error("map is not of the form X (x) X^op -> A (x) A^op: {0}")]
    OppositeStructureMissing(String),

    #[error("quantum functions do not commute (residual {residual:.3e})")]
    CommutationFailure { residual: f64 },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("state is not normalized (norm {norm:.6})")]
    UnnormalizedState { norm: f64 },

    #[error("unsatisfiable request: {0}")]
    Unsatisfiable(String),

    #[error("extraction failed: {0}")]
    ExtractionFailure(String),

    #[error("invalid quantum function: {0}")]
    InvalidQuantumFunction(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl QsyncError {
    pub(crate) fn mismatch(left: impl std::fmt::Display, right: impl std::fmt::Display) -> Self {
        QsyncError::WireMismatch {
            left: left.to_string(),
            right: right.to_string(),
        }
    }
}
