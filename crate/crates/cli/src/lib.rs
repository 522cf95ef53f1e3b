//! Command-line planner and experiment harness built on `uav-aoi-core`:
//! scenario files, checkpoints, result documents and sweeps.

pub mod checkpoint;
pub mod cli;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;
pub mod policy;
pub mod scenario_io;
pub mod sweep;

/// Environment variable bounding the worker thread count.
pub const WORKERS_ENV: &str = "AOI_WORKERS";

/// Sizes the global thread pool from `AOI_WORKERS` when set.
pub fn init_workers() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("{WORKERS_ENV} must be a positive integer, got {v:?}"))?;
        if n == 0 {
            anyhow::bail!("{WORKERS_ENV} must be a positive integer");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}
