use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the discretization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("geometry error in cell {cell}: {reason}")]
    Geometry { cell: usize, reason: String },

    #[error("voronoi generation failed: {0}")]
    Generation(String),

    #[error("ill-conditioned polynomial basis on cell {cell} (condition {condition:.3e})")]
    Conditioning { cell: usize, condition: f64 },

    #[error("coefficient evaluation failed in cell {cell}: {reason}")]
    Coefficient { cell: usize, reason: String },

    #[error("inconsistent data: {0}")]
    Consistency(String),

    #[error("factorization of the shifted operator failed at shift {shift:e}; try another shift")]
    Shift { shift: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {worst_residual:.3e})")]
    Iteration { iterations: usize, worst_residual: f64 },

    #[error("only {computed} computed eigenvalues for {required} reference values")]
    Coverage { computed: usize, required: usize },

    #[error("cannot read reference data {path}: {reason}")]
    Ingestion { path: PathBuf, reason: String },

    #[error("rate fit needs at least 3 usable points, got {0}")]
    Fit(usize),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn geometry(cell: usize, reason: impl Into<String>) -> Self {
        Error::Geometry {
            cell,
            reason: reason.into(),
        }
    }

    /// Attaches a cell id to errors raised by code that did not know it.
    pub(crate) fn in_cell(self, cell: usize) -> Self {
        match self {
            Error::Geometry { reason, .. } => Error::Geometry { cell, reason },
            Error::Conditioning { condition, .. } => Error::Conditioning { cell, condition },
            Error::Coefficient { reason, .. } => Error::Coefficient { cell, reason },
            other => other,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::Parse { .. } => 2,
            Error::Io(_) | Error::Ingestion { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
