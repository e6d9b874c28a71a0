use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by mesh handling, generation, smoothing and model I/O.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh has no elements")]
    EmptyMesh,

    #[error("node {0} is fixed and cannot be smoothed")]
    BoundaryNode(usize),

    #[error("incident triangles of node {0} do not form a single closed ring")]
    OpenRing(usize),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("all input points are collinear")]
    DegenerateInput,

    #[error("points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),

    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("ring angle at ring node {0} has a zero-length edge")]
    DegenerateAngle(usize),

    #[error("star triangle {0} is degenerate")]
    DegenerateTriangle(usize),

    #[error("all star points coincide")]
    ZeroExtent,

    #[error("unknown smoother `{0}`")]
    UnknownSmoother(String),

    #[error("smoother `{0}` requires a trained model")]
    MissingModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dataset split is empty: {0}")]
    EmptyDataset(&'static str),

    #[error("checkpoint version mismatch: {0}")]
    VersionMismatch(String),

    #[error("corrupt checkpoint: {0}")]
    CorruptFile(String),

    #[error(transparent)]
    Autodiff(#[from] crate::autodiff::AutodiffError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl MeshError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MeshError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = MeshError> = std::result::Result<T, E>;
