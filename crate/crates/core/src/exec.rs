//! Worker pools keyed by worker count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();

/// Returns the shared pool with exactly `workers` threads, building it on
/// first use.
pub fn pool(workers: usize) -> Result<Arc<ThreadPool>> {
    if workers == 0 {
        return Err(Error::InvalidRequest("workers must be positive".into()));
    }
    let pools = POOLS.get_or_init(Default::default);
    let mut pools = pools.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(p) = pools.get(&workers) {
        return Ok(Arc::clone(p));
    }
    let p = ThreadPoolBuilder::new()
        .num_threads(workers)
        .thread_name(move |i| format!("pkmeans-{workers}-{i}"))
        .build()
        .map_err(|e| Error::Resource(format!("failed to start worker pool: {e}")))?;
    let p = Arc::new(p);
    pools.insert(workers, Arc::clone(&p));
    Ok(p)
}

/// Index of the current worker inside its pool, or 0 outside a pool.
#[inline]
pub(crate) fn worker_index() -> usize {
    rayon::current_thread_index().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pools_are_cached_per_size() {
        let a = pool(3).unwrap();
        let b = pool(3).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(a.current_num_threads(), 3);
        assert!(pool(0).is_err());
    }

    #[test]
    fn worker_index_within_pool() {
        let p = pool(2).unwrap();
        let idx = p.install(worker_index);
        assert!(idx < 2);
    }
}
