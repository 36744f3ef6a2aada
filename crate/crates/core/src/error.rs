use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, FvkError>;

#[derive(Debug, Error)]
pub enum FvkError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("mesh parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("point ({x}, {y}) lies outside the triangulated domain")]
    Location { x: f64, y: f64 },

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("linear solve failed at pivot {pivot}: {msg}")]
    LinearAlgebra { pivot: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl FvkError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FvkError::Io {
            path: path.into(),
            source,
        }
    }
}
