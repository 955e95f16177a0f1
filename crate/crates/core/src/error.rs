use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the inputs of an operation was violated.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("state ({x}, {y}) lies outside the {width}x{height} map")]
    OutOfBounds {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("map generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error("cannot decode {path}: pixel ({x}, {y}) has {detail}")]
    Decode {
        path: String,
        x: u32,
        y: u32,
        detail: String,
    },

    #[error("empty region mask: no heuristic samples available, fall back to uniform sampling (mu = 100)")]
    EmptyRegion,

    #[error("problem is infeasible within the planning budget: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
