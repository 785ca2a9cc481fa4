use std::path::PathBuf;

use crate::conic::KktResiduals;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("face {face} references vertex {index}, but the mesh has {n_vertices} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        n_vertices: usize,
    },

    #[error("face {face} repeats a vertex")]
    RepeatedVertex { face: usize },

    #[error("face {face} is degenerate (area {area:e})")]
    DegenerateFace { face: usize, area: f64 },

    #[error("edge ({0}, {1}) is shared by more than two faces")]
    NonManifoldEdge(usize, usize),

    #[error("faces adjacent to edge ({0}, {1}) are inconsistently oriented")]
    InconsistentOrientation(usize, usize),

    #[error("mesh has no faces")]
    EmptyMesh,

    #[error("requested mesh has {requested} faces, above the cap of {cap}")]
    FaceCap { requested: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected length {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("conic step did not converge ({status:?}) at step {step}: {residuals}")]
    ConicNotConverged {
        step: usize,
        status: crate::conic::SolveStatus,
        residuals: KktResiduals,
    },

    #[error("contradictory equality rows in conic program: {0}")]
    Infeasible(String),

    #[error("non-finite value in field at step {step}")]
    NonFinite { step: usize },

    #[error("numerical underflow: {0}")]
    NumericalUnderflow(String),

    #[error("cannot estimate order: consecutive errors {0:e} and {1:e} give a zero or undefined ratio")]
    DivisionByZero(f64, f64),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { expected, actual })
    }
}
