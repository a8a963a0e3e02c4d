//! Verification runs, counterexample searches and matrix file I/O.
//!
//! Suites draw every trial from its own `(seed, index)` stream and fold the
//! results in trial order, so reports are identical across thread counts.

mod config;
mod counterexample;
mod io;
mod report;
mod suites;

pub use config::{RunConfig, Suite};
pub use counterexample::{
    find_counterexample, random_search, replay, Claim, Counterexample, Margins, WitnessOrigin,
    AMPLIFICATION, TUBE_DIM,
};
pub use io::{decompose, DecomposeMode, Decomposition, MatrixEntry, MatrixFile};
pub use report::{
    CheckSummary, Constant, Report, Witness, MAX_WITNESSES_PER_CHECK, SCHEMA_VERSION,
};
pub use suites::{
    run_suite, snf_defects, APERTURE_SLACK, COMPOSITION_TOL, C_HAT_SPREAD, INVARIANCE_TOL,
    NORM_IDENTITY_TOL,
};

use crate::error::{Error, Result};

/// Environment variable capping the worker threads of suites and searches.
pub const THREADS_ENV: &str = "HOLO_THREADS";

/// Run `f` on a pool sized by `HOLO_THREADS`, or on the global pool when unset.
pub fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(f()),
        Ok(value) => {
            let threads: usize = value
                .trim()
                .parse()
                .ok()
                .filter(|&t| t > 0)
                .ok_or_else(|| {
                    Error::Config(format!("{THREADS_ENV}={value:?} is not a positive integer"))
                })?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
