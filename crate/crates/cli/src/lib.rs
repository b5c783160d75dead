//! Configuration-driven experiments on the superintegrable potentials of
//! `superint-core`: trajectory simulation with drift summaries, the
//! residual/identity verification suite, and orbit-closure detection.

pub mod commands;
pub mod config;
pub mod sampling;
pub mod suite;

pub use commands::{closure, exit, simulate, verify, RunError};
pub use config::{ExperimentConfig, Purpose};

/// Environment variable that sets the worker-pool size.
pub const WORKERS_ENV: &str = "SUPERINT_WORKERS";

/// Size the global rayon pool from [`WORKERS_ENV`] when it is set to a
/// positive integer. Only the first call has an effect.
pub fn init_workers() {
    if let Some(n) = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
