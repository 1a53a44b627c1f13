use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the range where the requested quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request needs more points, vertices or eigenpairs than allowed.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// Hole layout violates the separation or injectivity requirements.
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("meshing failed at hole {hole}: {reason}")]
    Meshing { hole: usize, reason: String },
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numerical failure: {message} (residual {residual:.3e})")]
    Numeric { message: String, residual: f64 },
    #[error("degenerate measure: {0}")]
    Degenerate(String),
    /// The Ẇ^{-1,2} seminorm of a measure difference with nonzero total mass is infinite.
    #[error("measure difference has total weight {total:.3e}; the homogeneous dual seminorm is infinite")]
    InfiniteSeminorm { total: f64 },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
