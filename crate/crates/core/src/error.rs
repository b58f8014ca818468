use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, FwmError>;

#[derive(Debug, Error)]
pub enum FwmError {
    /// An argument outside the domain of a formula (negative intensity, zero pulse length, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration, with the offending field named.
    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },

    #[error("singular steady-state system: {0}")]
    Singular(String),

    #[error("numerical blow-up at z-slice {slice}, time step {step}: non-finite field")]
    NumericalBlowup { slice: usize, step: usize },

    /// Efficiency or transmission outside its physical range after a solve.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("trace has {rows} rows, at least {min} required")]
    TraceLength { rows: usize, min: usize },

    /// A sweep point failed; `variable = value` names the point.
    #[error("sweep point {variable} = {value}: {source}")]
    SweepPoint {
        variable: String,
        value: f64,
        #[source]
        source: Box<FwmError>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl FwmError {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        FwmError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn domain(message: impl Into<String>) -> Self {
        FwmError::Domain(message.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FwmError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// 2 for configuration/input errors, 3 for numerical failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            FwmError::Domain(_)
            | FwmError::Config { .. }
            | FwmError::Parse { .. }
            | FwmError::TraceLength { .. } => 2,
            FwmError::Singular(_) | FwmError::NumericalBlowup { .. } | FwmError::Numerical(_) => 3,
            FwmError::Io { .. } => 4,
            FwmError::SweepPoint { source, .. } => source.exit_code(),
        }
    }
}
