use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: parse error: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("self-loop at edge #{index} ({node}, {node})")]
    SelfLoop { index: usize, node: usize },

    #[error("duplicate edge #{index} ({u}, {v})")]
    DuplicateEdge { index: usize, u: usize, v: usize },

    #[error("non-finite weight at edge #{index} ({u}, {v})")]
    NonFiniteWeight { index: usize, u: usize, v: usize },

    #[error("edge #{index} references node {node} but the graph has {node_count} nodes")]
    NodeOutOfRange {
        index: usize,
        node: usize,
        node_count: usize,
    },

    #[error(
        "ragged {what} attributes: element {index} has dimension {found}, expected {expected}"
    )]
    RaggedAttributes {
        what: &'static str,
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("missing {what} attributes required by the configured attribute kernel")]
    MissingAttributes { what: &'static str },

    #[error("attribute dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("enumeration budget exceeded: more than {budget} ordinal patterns")]
    BudgetExceeded { budget: usize },

    #[error("kernel evaluation failed for pair ({i}, {j}): {source}")]
    GramCell {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },

    #[error("labels contain a single class")]
    SingleClass,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("classes indistinguishable by construction")]
    IndistinguishableClasses,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Errors caused by numeric limits or numerically invalid matrices
    /// (enumeration budget, asymmetric Gram) as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::BudgetExceeded { .. } | Error::Asymmetric { .. } => true,
            Error::GramCell { source, .. } => source.is_numeric(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
