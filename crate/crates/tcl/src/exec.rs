use rayon::prelude::*;
use tcl_core::Executor;

/// Checks scenarios on the rayon thread pool.
pub struct Parallel;

impl Executor for Parallel {
    fn map(&self, n: usize, f: &(dyn Fn(usize) -> bool + Sync)) -> Vec<bool> {
        (0..n).into_par_iter().map(f).collect()
    }
}
