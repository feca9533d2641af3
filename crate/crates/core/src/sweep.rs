//! Data-parallel sweep runner. Verification sweeps fan out independent
//! (net, probe, window, order, eps) tasks; results are collected in task
//! order so aggregation stays deterministic regardless of scheduling.
//!
//! With the `parallel` feature (default) tasks run on the rayon pool;
//! without it, or with `ExecMode::Sequential`, they run in order on the
//! calling thread.

/// Execution mode for a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[default]
    Parallel,
    Sequential,
}

/// Map `f` over the inputs, preserving input order in the output.
pub fn run_tasks<T, R, F>(inputs: Vec<T>, mode: ExecMode, f: F) -> Vec<R>
where
    T: Send + Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        ExecMode::Sequential => inputs.iter().map(|t| f(t)).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                inputs.par_iter().map(|t| f(t)).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                inputs.iter().map(|t| f(t)).collect()
            }
        }
    }
}

/// Global thread cap for parallel sweeps; call once before running.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) -> bool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .is_ok()
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) -> bool {
    false
}
