//! Pluggable fan-out for the embarrassingly parallel loops (z-inversion circle
//! points, Monte Carlo path blocks).
//!
//! The core crate only ships [`Serial`]; a threaded executor lives with the
//! std-side tooling. Results are always returned in index order so that any
//! reduction done by the caller is deterministic.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluate `f(0), …, f(n-1)` and return them in order.
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;

    /// How many evaluations are worth having in flight at once.
    fn width(&self) -> usize {
        1
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..n).map(f).collect()
    }
}
