//! Partitioning of point indices into equal-length chunks.

use std::ops::Range;

use crate::error::{Error, Result};

/// Default chunk length, one GPU thread block's worth of points.
pub const DEFAULT_CHUNK_SIZE: usize = 1024;

/// Contiguous, disjoint, equal-length (except possibly the last) ranges
/// covering `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkPlan {
    n: usize,
    chunk_size: usize,
}

/// Plans `ceil(n / chunk_size)` chunks over `n` points.
pub fn plan_chunks(n: usize, chunk_size: usize) -> Result<ChunkPlan> {
    if n == 0 {
        return Err(Error::InvalidRequest(
            "cannot plan chunks over zero points".into(),
        ));
    }
    if chunk_size == 0 {
        return Err(Error::InvalidRequest("chunk size must be positive".into()));
    }
    Ok(ChunkPlan { n, chunk_size })
}

impl ChunkPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn chunk_size(&self) -> usize {
        self.chunk_size
    }

    /// Number of chunks, `ceil(n / chunk_size)`.
    pub fn len(&self) -> usize {
        self.n.div_ceil(self.chunk_size)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self, chunk: usize) -> Range<usize> {
        let start = chunk * self.chunk_size;
        start..(start + self.chunk_size).min(self.n)
    }

    pub fn ranges(&self) -> impl ExactSizeIterator<Item = Range<usize>> + '_ {
        (0..self.len()).map(|c| self.range(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ranges(n: usize, c: usize) -> Vec<Range<usize>> {
        plan_chunks(n, c).unwrap().ranges().collect()
    }

    #[test]
    fn examples() {
        assert_eq!(
            ranges(4000, 1024),
            vec![0..1024, 1024..2048, 2048..3072, 3072..4000]
        );
        assert_eq!(ranges(1024, 1024), vec![0..1024]);
        assert_eq!(ranges(10, 3), vec![0..3, 3..6, 6..9, 9..10]);
    }

    #[test]
    fn rejects_zero() {
        assert!(plan_chunks(0, 4).is_err());
        assert!(plan_chunks(4, 0).is_err());
    }

    proptest! {
        #[test]
        fn ranges_partition_domain(n in 1usize..50_000, c in 1usize..5_000) {
            let plan = plan_chunks(n, c).unwrap();
            let rs: Vec<_> = plan.ranges().collect();
            prop_assert_eq!(rs.len(), n.div_ceil(c));
            let mut next = 0;
            for (i, r) in rs.iter().enumerate() {
                prop_assert_eq!(r.start, next);
                prop_assert!(r.end > r.start);
                if i + 1 < rs.len() {
                    prop_assert_eq!(r.len(), c);
                } else {
                    prop_assert!(r.len() <= c);
                }
                next = r.end;
            }
            prop_assert_eq!(next, n);
        }
    }
}
