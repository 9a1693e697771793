//! Fixed-tree reductions.
//!
//! Sums are evaluated over a tree that depends only on the input length and
//! the block size: each block of `block_size` consecutive values is summed
//! left to right starting from `0.0`, then the block partials are summed left
//! to right. Workers only change who computes which block, so results are
//! bit-identical for any worker count.

use rayon::prelude::*;

use crate::chunk::ChunkPlan;
use crate::data::{sq_dist, Dataset};
use crate::error::{Error, Result};
use crate::exec;

pub const DEFAULT_BLOCK_SIZE: usize = 1024;

/// Shape of the summation tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionPlan {
    block_size: usize,
}

impl Default for ReductionPlan {
    fn default() -> Self {
        Self {
            block_size: DEFAULT_BLOCK_SIZE,
        }
    }
}

impl ReductionPlan {
    pub fn new(block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::InvalidRequest("block size must be positive".into()));
        }
        Ok(Self { block_size })
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn num_blocks(&self, len: usize) -> usize {
        len.div_ceil(self.block_size)
    }

    /// Single-threaded evaluation of the same tree.
    pub fn sum(&self, values: &[f64]) -> f64 {
        combine(values.chunks(self.block_size).map(block_sum))
    }
}

/// Left-to-right sum starting from `0.0`.
#[inline]
pub fn block_sum(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc, v| acc + v)
}

/// Left-to-right combine of partial sums starting from `0.0`.
#[inline]
pub fn combine<I: IntoIterator<Item = f64>>(partials: I) -> f64 {
    partials.into_iter().fold(0.0, |acc, v| acc + v)
}

/// Per-block partial sums, computed by `workers` threads.
pub fn block_partials(values: &[f64], plan: &ReductionPlan, workers: usize) -> Result<Vec<f64>> {
    let pool = exec::pool(workers)?;
    Ok(pool.install(|| values.par_chunks(plan.block_size).map(block_sum).collect()))
}

/// Fixed-tree sum of `values`. An empty input sums to `0.0`.
pub fn parallel_sum(values: &[f64], plan: &ReductionPlan, workers: usize) -> Result<f64> {
    Ok(combine(block_partials(values, plan, workers)?))
}

/// Lowers every `dsq[i]` to the squared distance from point `i` to `center`
/// and returns the fixed-tree sum of each chunk's updated entries.
///
/// Each chunk owns a disjoint slice of `dsq`.
pub fn parallel_min_update(
    dsq: &mut [f64],
    data: &Dataset,
    center: &[f64],
    chunks: &ChunkPlan,
    plan: &ReductionPlan,
    workers: usize,
) -> Result<Vec<f64>> {
    let dims = data.dims();
    if center.len() != dims {
        return Err(Error::DimensionMismatch {
            expected: dims,
            actual: center.len(),
        });
    }
    if dsq.len() != data.n() || chunks.n() != data.n() {
        return Err(Error::InvalidRequest(format!(
            "distance table ({}) and chunk plan ({}) must cover all {} points",
            dsq.len(),
            chunks.n(),
            data.n()
        )));
    }
    let pool = exec::pool(workers)?;
    let cs = chunks.chunk_size();
    Ok(pool.install(|| {
        dsq.par_chunks_mut(cs)
            .zip(data.points().par_chunks(cs * dims))
            .map(|(d, pts)| {
                min_update_slice(d, pts, center);
                plan.sum(d)
            })
            .collect()
    }))
}

/// Elementwise `dsq[i] = min(dsq[i], |p_i - center|²)` over one slice.
#[inline]
pub(crate) fn min_update_slice(dsq: &mut [f64], points: &[f64], center: &[f64]) {
    let dims = center.len();
    for (d, p) in dsq.iter_mut().zip(points.chunks_exact(dims)) {
        let v = sq_dist(p, center);
        if v < *d {
            *d = v;
        }
    }
}
