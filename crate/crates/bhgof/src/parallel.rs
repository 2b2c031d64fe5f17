//! Thread-pool execution of independent indexed tasks.

use std::sync::Arc;

use bhgof_core::bootstrap::Executor;
use rayon::prelude::*;

/// Runs tasks on a dedicated rayon pool. Results come back in index order,
/// so output never depends on the number of workers.
#[derive(Clone)]
pub struct PoolExecutor {
    pool: Arc<rayon::ThreadPool>,
}

impl PoolExecutor {
    /// Pool with `workers` threads (0 means one per logical CPU).
    pub fn new(workers: usize) -> anyhow::Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(PoolExecutor { pool: Arc::new(pool) })
    }

    /// Number of worker threads.
    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for PoolExecutor {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
