use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid {what}: {message}")]
    Invalid { what: &'static str, message: String },

    #[error("layer `{layer}` references unknown predecessor `{predecessor}`")]
    DanglingPredecessor { layer: String, predecessor: String },

    #[error("workload graph has a cycle through layer `{0}`")]
    Cycle(String),

    #[error("layer `{layer}`: declared {field} = {declared}, derived {derived}")]
    DimensionMismatch {
        layer: String,
        field: &'static str,
        declared: u64,
        derived: u64,
    },

    #[error("unknown action `{action}` for component class `{class}`")]
    UnknownAction { class: String, action: String },

    #[error("PE `{pe}`: clock {clock_hz} Hz does not divide base clock {base_hz} Hz")]
    ClockRatio { pe: String, clock_hz: u64, base_hz: u64 },

    #[error("mapping: {0}")]
    Mapping(String),

    #[error("schedule deadlock: layer `{blocked}` waits on `{waiting_on}`")]
    Deadlock { blocked: String, waiting_on: String },

    #[error("split cycle {split} outside (0, {duration})")]
    SplitOutOfRange { split: u64, duration: u64 },

    #[error("floorplan: {0}")]
    Floorplan(String),

    #[error("thermal: {0}")]
    Thermal(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
