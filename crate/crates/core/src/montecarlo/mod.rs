//! Seeded Monte-Carlo studies.
//!
//! Replications are independent: each one draws its own seed from
//! `(master_seed, params_id, n, rep)` and results are merged in key order,
//! so every output is bit-identical whatever the number of worker threads.
//! With the `parallel` feature (default) replications are spread over a
//! rayon pool; without it everything runs on the calling thread.

mod diagnostics;
mod study;

pub use diagnostics::{
    clt_diagnostic, degenerate_theta_p, rate_diagnostic, CltReport, RateCheckpoint, RateReport,
};
pub use study::{
    default_suite, size_power_study, size_power_study_with, PowerRow, PowerTable, StudyConfig,
};

/// How replications are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    Sequential,
    /// Parallel over the current rayon pool; sequential when the crate is
    /// built without the `parallel` feature.
    #[default]
    Parallel,
}

/// `(0..count).map(f)` collected in index order under the given schedule.
pub fn map_indexed<T, F>(count: usize, schedule: Schedule, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match schedule {
        Schedule::Sequential => (0..count).map(f).collect(),
        Schedule::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..count).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..count).map(f).collect()
            }
        }
    }
}

/// Runs `f` on a dedicated pool of `workers` threads. `None` uses the
/// global pool. Without the `parallel` feature this just calls `f`.
pub fn with_workers<R, F>(workers: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match workers {
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .expect("failed to build rayon pool")
                .install(f),
            None => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_indexed_keeps_order() {
        let seq = map_indexed(1000, Schedule::Sequential, |i| i * i);
        let par = with_workers(Some(4), || map_indexed(1000, Schedule::Parallel, |i| i * i));
        assert_eq!(seq, par);
        assert_eq!(seq[31], 961);
    }
}
