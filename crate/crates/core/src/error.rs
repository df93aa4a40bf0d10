use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh is not watertight: {open_edges} edges are not shared by exactly two triangles")]
    NonWatertight { open_edges: usize },

    #[error("mesh has {count} zero-area triangles (tolerance {tolerance})")]
    DegenerateMesh { count: usize, tolerance: usize },

    #[error("voxelization produced no occupied cell")]
    EmptyResult,

    #[error("no bottom-layer cell is part of the support region")]
    EmptySupport,

    #[error("total mass is zero")]
    ZeroMass,

    #[error("loss became non-finite at step {step}")]
    NonFinite { step: usize },

    #[error("scalar field has no iso-crossing")]
    EmptyField,

    #[error("outer triangle {outer} intersects inner triangle {inner}")]
    ShellIntersection { outer: usize, inner: usize },

    #[error("support hull is degenerate (point or segment)")]
    DegenerateHull,

    #[error("center of mass projects outside the support hull")]
    ComOutsideHull,

    #[error("mesh has no triangles")]
    EmptyMesh,

    #[error("point set is empty")]
    EmptySet,

    #[error("malformed file: {0}")]
    MalformedFile(String),

    #[error("parse error on line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("bad magic bytes, expected DFD1")]
    BadMagic,

    #[error("unsupported grid format version {0}")]
    BadVersion(u32),

    #[error("payload size mismatch: expected {expected} bytes, found {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for I/O failures, false for validation and domain errors.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}
