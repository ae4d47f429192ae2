//! Command-line front end, report formats and Monte Carlo validation for
//! [`rotablue_core`].

pub mod cli;
pub mod report;
pub mod simulate;

pub use rotablue_core as core;

/// Worker-thread cap from `ROTABLUE_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("ROTABLUE_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `f` on a pool limited by [`thread_cap`], or on the global pool.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match thread_cap().map(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build()) {
        Some(Ok(pool)) => pool.install(f),
        _ => f(),
    }
}
