//! Loading and resolving experiment configurations.

use std::path::Path;

use srsbs_core::harness::ExperimentConfig;

use crate::{Error, Result};

/// Environment variable overriding the configured seed.
pub const SEED_ENV: &str = "SRSBS_SEED";

/// Reads a JSON experiment config. Missing fields take their defaults.
pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse(text: &str) -> serde_json::Result<ExperimentConfig> {
    serde_json::from_str(text)
}

pub fn to_json(config: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

/// Seed precedence: command-line flag, then environment, then file.
pub fn resolve_seed(file_seed: u64, env_value: Option<&str>, flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match env_value {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        None => Ok(file_seed),
    }
}
