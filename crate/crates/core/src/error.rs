use crate::graph::VertexId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid graph parameters: {0}")]
    GraphParams(String),

    #[error("topology event rejected: {0}")]
    Topology(String),

    #[error("color {value} does not fit modulus {modulus}")]
    ColorRange { value: u64, modulus: u64 },

    #[error("mixed moduli: {0} vs {1}")]
    MixedModuli(u64, u64),

    #[error("input coloring is not proper: {0}")]
    ImproperInput(String),

    #[error("no valid evaluation point for color {color} (field {field}); parameter bug")]
    NoValidPoint { color: u64, field: u64 },

    #[error("cole-vishkin input is not a disjoint union of paths and cycles: {0}")]
    NotPathForest(String),

    #[error("bandwidth violation at vertex {vertex} in round {round}: {bits} bits exceeds {limit}")]
    Bandwidth {
        vertex: VertexId,
        round: usize,
        bits: usize,
        limit: usize,
    },

    #[error("model violation at vertex {vertex} in round {round}: {reason}")]
    Model {
        vertex: VertexId,
        round: usize,
        reason: String,
    },

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("trace error: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
