//! Replication executors.
//!
//! Every Monte-Carlo loop in the crate maps a replication index to a value
//! and reduces the collected values in index order, so any executor that
//! preserves order gives bit-identical results.

use alloc::vec::Vec;

pub trait Replicator: Sync {
    /// Evaluates `f(0), …, f(n - 1)` and returns the results in index order.
    fn run<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs replications one after another on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Serial;

impl Replicator for Serial {
    fn run<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
