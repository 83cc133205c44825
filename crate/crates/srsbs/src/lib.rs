//! File formats, configuration loading and parallel experiment running on
//! top of [`srsbs_core`].
//!
//! Formats:
//!
//! - Experiment config: JSON mirroring [`ExperimentConfig`].
//! - Amplitude trace: one `a^(k)` per line, one line per SRS period.
//! - Events: CSV `period_index,code_id,correlation`.
//! - Results: CSV `parameter_value,detection_probability,false_alarm_probability,
//!   cross_false_alarm_probability,n_srs,seed`.
//! - Codes: CSV rows `code_id,c_1,...,c_31`, no header.

pub mod config;
pub mod formats;
pub mod runner;
pub mod stats;

use std::path::PathBuf;

pub use srsbs_core as core;
pub use srsbs_core::harness::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] srsbs_core::Error),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
