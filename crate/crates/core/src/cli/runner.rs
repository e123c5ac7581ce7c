//! Chain fan-out over a worker pool with a deterministic merge order.

use rayon::prelude::*;

use crate::error::{CritError, Result};
use crate::lattice::LatticeSpec;
use crate::sampler::{sample_chain, Sample, SamplerConfig};

/// Worker count: the flag, else `CRIT_THREADS`, else the available cores.
pub fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("CRIT_THREADS").ok().and_then(|v| v.parse().ok()))
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CritError::InvalidArgument(format!("cannot build worker pool: {e}")))
}

/// Runs one chain per `(config, n_samples)` job and returns each chain's
/// observations, in job order regardless of scheduling.
pub fn run_chains<T, F>(
    pool: &rayon::ThreadPool,
    spec: &LatticeSpec,
    jobs: &[(SamplerConfig, usize)],
    observe: F,
) -> Result<Vec<Vec<T>>>
where
    T: Send,
    F: Fn(&Sample<'_>) -> Result<T> + Sync,
{
    pool.install(|| {
        jobs.par_iter()
            .map(|(cfg, n)| {
                let mut out = Vec::with_capacity(*n);
                if *n > 0 {
                    sample_chain(spec, cfg, *n, |s| observe(s).map(|t| out.push(t)))?;
                }
                Ok(out)
            })
            .collect()
    })
}
