use thiserror::Error;

/// Errors raised while building meshes, assembling operators or running the
/// spectral and Krylov solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("element {element} is degenerate: |det F'| = {volume:e} <= {threshold:e}")]
    DegenerateElement {
        element: usize,
        volume: f64,
        threshold: f64,
    },
    #[error("element {element} references vertex {index}, but the mesh has {n_vertices} vertices")]
    IndexOutOfRange {
        element: usize,
        index: usize,
        n_vertices: usize,
    },
    #[error("inconsistent dimension: {0}")]
    InconsistentDimension(String),
    #[error("unknown mesh family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown diffusion field `{0}`")]
    UnknownField(String),
    #[error("diffusion tensor is not symmetric positive definite at {point:?} (min eigenvalue {min_eigenvalue:e})")]
    NonSpdSample {
        point: [f64; 3],
        min_eigenvalue: f64,
    },
    #[error("diagonal entry {row} is not positive ({value:e})")]
    NonpositiveDiagonal { row: usize, value: f64 },
    #[error("no convergence after {iterations} iterations (best estimate {estimate:e})")]
    NoConvergence { iterations: usize, estimate: f64 },
    #[error("symmetric part is not positive definite (curvature {curvature:e})")]
    IndefiniteSymmetricPart { curvature: f64 },
    #[error("mesh is not fine enough: H_h = {h_h:e} >= d_min = {d_lower:e}")]
    CoarseMeshRegime { h_h: f64, d_lower: f64 },
    #[error("calibration needs at least 4 meshes, got {0}")]
    InsufficientFamily(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse grouping of errors, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFamily {
    Mesh,
    Field,
    Assembly,
    Solver,
    Bounds,
    Input,
}

impl Error {
    pub fn family(&self) -> ErrorFamily {
        match self {
            Error::DegenerateElement { .. }
            | Error::IndexOutOfRange { .. }
            | Error::InconsistentDimension(_)
            | Error::UnknownFamily(_)
            | Error::InvalidParams(_) => ErrorFamily::Mesh,
            Error::UnknownField(_) | Error::NonSpdSample { .. } => ErrorFamily::Field,
            Error::NonpositiveDiagonal { .. } | Error::DimensionMismatch { .. } => {
                ErrorFamily::Assembly
            }
            Error::NoConvergence { .. } | Error::IndefiniteSymmetricPart { .. } => {
                ErrorFamily::Solver
            }
            Error::CoarseMeshRegime { .. } | Error::InsufficientFamily(_) => ErrorFamily::Bounds,
            Error::Parse(_) | Error::Io(_) | Error::Json(_) => ErrorFamily::Input,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
