use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by mesh construction, I/O, and the denoising pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("degenerate face {face}")]
    DegenerateFace { face: usize },

    #[error("non-manifold edge ({a}, {b}) shared by more than two faces")]
    NonManifoldEdge { a: usize, b: usize },

    #[error("edge ({a}, {b}) traversed in the same direction by two faces")]
    InconsistentOrientation { a: usize, b: usize },

    #[error("mesh has no faces")]
    EmptyMesh,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("unsupported element: {0}")]
    UnsupportedElement(String),

    #[error("face at line {line} has {count} vertices (pass --triangulate to fan-split)")]
    NonTriangleFace { line: usize, count: usize },

    #[error("cannot infer mesh format from {0}")]
    UnknownFormat(PathBuf),

    #[error("conjugate gradient stalled at relative residual {residual:e} after {iterations} iterations")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("non-finite value in {0}")]
    NonFiniteValue(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
