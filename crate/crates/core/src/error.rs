use std::path::PathBuf;

use thiserror::Error;

use crate::tree_model::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tree structure: {0}")]
    Structure(String),

    #[error("tree failed validation: {}", .0.join("; "))]
    Invalid(Vec<String>),

    #[error("assignment covers {got} nodes but the tree has {expected}")]
    IncompleteAssignment { expected: usize, got: usize },

    #[error("leaf sample covers {got} leaves but the tree has {expected}")]
    LeafSampleSize { expected: usize, got: usize },

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("node {0} is the root and has no incoming link")]
    RootHasNoLink(NodeId),

    #[error("node {0} is a leaf; leaf labels cannot be flipped")]
    FlipLeaf(NodeId),

    #[error("tree has {nodes} nodes, above the enumeration cap of {cap}")]
    EnumerationCap { nodes: usize, cap: usize },

    #[error("observed leaf vector has zero probability under the current parameters")]
    ZeroEvidence,

    #[error("structures differ")]
    StructureMismatch,

    #[error("counts are undefined: {0}")]
    UndefinedCounts(String),

    #[error("parameter generation gave up after {0} rejected draws")]
    RejectionExhausted(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}, line {line}: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
