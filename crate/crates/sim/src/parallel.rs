//! Thread-pool replication executor.

use dcx_core::Replicator;
use rayon::prelude::*;
use rayon::ThreadPool;

/// Runs replications on a dedicated rayon pool. Results come back in index
/// order, so output does not depend on the thread count.
pub struct Parallel {
    pool: ThreadPool,
}

impl Parallel {
    /// `threads = None` uses rayon's default (one per core).
    pub fn new(threads: Option<usize>) -> Result<Self, rayon::ThreadPoolBuildError> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            b = b.num_threads(n);
        }
        Ok(Self { pool: b.build()? })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Replicator for Parallel {
    fn run<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dcx_core::{RngStream, Serial};

    #[test]
    fn matches_serial_order() {
        let root = RngStream::new(9, 0);
        let f = |i: usize| root.child(i as u64).next_u64();
        let p = Parallel::new(Some(4)).unwrap();
        assert_eq!(p.threads(), 4);
        assert_eq!(p.run(1000, f), Serial.run(1000, f));
    }
}
