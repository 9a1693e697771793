use crate::chunk::DEFAULT_CHUNK_SIZE;
use crate::error::{Error, Result};
use crate::layout::LayoutStrategy;

/// Execution settings for the parallel algorithms.
///
/// Outputs never depend on `workers`, `chunk_size` or `strategy`; only
/// `rng_seed` and the input data determine results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecConfig {
    pub chunk_size: usize,
    pub workers: usize,
    pub strategy: LayoutStrategy,
    pub rng_seed: u64,
}

impl Default for ExecConfig {
    fn default() -> Self {
        Self {
            chunk_size: DEFAULT_CHUNK_SIZE,
            workers: available_cores(),
            strategy: LayoutStrategy::SharedMutable,
            rng_seed: 0,
        }
    }
}

impl ExecConfig {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_chunk_size(mut self, chunk_size: usize) -> Self {
        self.chunk_size = chunk_size;
        self
    }

    pub fn with_strategy(mut self, strategy: LayoutStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_seed(mut self, rng_seed: u64) -> Self {
        self.rng_seed = rng_seed;
        self
    }

    /// `ceil(n / chunk_size)`.
    pub fn num_chunks(&self, n: usize) -> usize {
        n.div_ceil(self.chunk_size)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk_size == 0 {
            return Err(Error::InvalidRequest("chunk_size must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidRequest("workers must be positive".into()));
        }
        Ok(())
    }
}

/// Logical cores visible to this process.
pub fn available_cores() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = ExecConfig::default();
        assert_eq!(cfg.chunk_size, 1024);
        assert!(cfg.workers >= 1);
        assert_eq!(cfg.num_chunks(4_000_000), 3907);
        assert_eq!(cfg.num_chunks(1024), 1);
    }

    #[test]
    fn validation() {
        assert!(ExecConfig::default().with_workers(0).validate().is_err());
        assert!(ExecConfig::default().with_chunk_size(0).validate().is_err());
        assert!(ExecConfig::default().with_workers(3).validate().is_ok());
    }
}
