//! Parallel drivers. Work items run on the rayon pool; results are collected
//! in plan order, so output never depends on scheduling.

use bilinear_sysid::experiment::{
    bmsb_configurations, run_bmsb_config, run_case, sweep_plan, BmsbReportRow, ExperimentConfig,
    ExperimentRow, SweepContext,
};
use bilinear_sysid::Result;
use rayon::prelude::*;

/// Number of random configurations in a BMSB suite.
pub const DEFAULT_BMSB_CONFIGS: usize = 20;

/// All `(sweep value, T, trial)` rows of `cfg`, in that order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let ctx = SweepContext::new(cfg)?;
    sweep_plan(cfg)?
        .par_iter()
        .map(|case| run_case(&ctx, case))
        .collect()
}

/// Four checks per configuration, ordered by configuration then check.
pub fn bmsb_suite(cfg: &ExperimentConfig, configs: usize, samples: usize) -> Result<Vec<BmsbReportRow>> {
    let grid = bmsb_configurations(cfg, configs)?;
    Ok(grid
        .par_iter()
        .map(|c| run_bmsb_config(c, samples))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect())
}
