use rayon::prelude::*;
use spitzer_core::exec::Executor;

/// Fans work out over the global rayon pool. Results come back in index
/// order, so reductions stay bit-identical to the serial executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl Executor for Rayon {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..n).into_par_iter().map(&f).collect()
    }

    fn width(&self) -> usize {
        rayon::current_num_threads()
    }
}
