//! Batch orchestration: per-day analysis fan-out, aggregate reduction,
//! synthetic data generation and plot-ready CSV emission.
//!
//! Per-day work is independent; with the `parallel` feature it runs on a
//! rayon pool sized by `RunConfig::parallelism` (0 = one thread per core,
//! 1 = serial). Results are collected in input order and aggregates are
//! reduced in date order, so serial and parallel runs produce byte-identical
//! outputs.

pub mod batch;
pub mod config;
pub mod plot_data;
pub mod synthetic;

pub use batch::{run_batch, run_day, BatchSummary, DayBundle, ManifestEntry};
pub use config::{RunConfig, VacationPeriod, OUTPUT_DIR_ENV};
pub use synthetic::{generate_synthetic_day, SyntheticReport};

/// Apply `f` to every item, preserving order. `parallelism` of 1 forces the
/// serial path; any other value uses the rayon pool when the `parallel`
/// feature is enabled (0 = default thread count).
pub(crate) fn map_ordered<I, T, F>(items: &[I], parallelism: usize, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if parallelism != 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(parallelism)
                .build()
                .expect("failed to build worker pool");
            return pool.install(|| {
                use rayon::prelude::*;
                items.par_iter().map(|i| f(i)).collect()
            });
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallelism;
    items.iter().map(f).collect()
}
