//! Parallel experiment execution. Results are identical to the sequential
//! harness and come back in input order.

use rayon::prelude::*;
use srsbs_core::harness::{run_experiment, sweep_configs, ExperimentConfig, Metrics};

use crate::Result;

/// Runs independent configurations concurrently.
pub fn run_all(configs: &[ExperimentConfig]) -> Result<Vec<Metrics>> {
    configs
        .par_iter()
        .map(run_experiment)
        .collect::<srsbs_core::Result<Vec<_>>>()
        .map_err(Into::into)
}

/// Parallel version of [`srsbs_core::harness::sweep`].
pub fn sweep(base: &ExperimentConfig, parameter: &str, values: &[f64]) -> Result<Vec<(f64, ExperimentConfig, Metrics)>> {
    let configs = sweep_configs(base, parameter, values)?;
    let metrics = run_all(&configs)?;
    Ok(values
        .iter()
        .copied()
        .zip(configs)
        .zip(metrics)
        .map(|((v, c), m)| (v, c, m))
        .collect())
}
