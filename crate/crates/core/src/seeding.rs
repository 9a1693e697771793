//! k-means++ seeding.
//!
//! The serial and parallel seeders share one coordinator loop: pick the
//! first center uniformly, then repeatedly lower every point's D² weight
//! against the newest center, total the weights over the fixed reduction
//! tree and draw the next center by inverse CDF. Only the update pass
//! differs between the two, and both compute the same block partials, so
//! the chosen centers are bit-identical.

use std::sync::Arc;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::chunk::{plan_chunks, ChunkPlan};
use crate::config::ExecConfig;
use crate::data::{sq_dist, CentroidSet, Dataset};
use crate::error::{Error, Result};
use crate::exec;
use crate::layout::{build_views, WorkerViews};
use crate::reduce::{self, block_sum, combine, min_update_slice, ReductionPlan};
use crate::rng::RngStream;

/// Squared distance from each point to its nearest chosen center.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestDistanceTable {
    dsq: Vec<f64>,
    total: f64,
}

impl NearestDistanceTable {
    /// A table with no centers chosen: every entry is `+inf`.
    pub fn new(n: usize) -> Self {
        Self {
            dsq: vec![f64::INFINITY; n],
            total: f64::INFINITY,
        }
    }

    pub fn dsq(&self) -> &[f64] {
        &self.dsq
    }

    /// Fixed-tree sum of [`dsq`](Self::dsq).
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.dsq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dsq.is_empty()
    }
}

/// Sampling weights with their fixed-tree block partials.
#[derive(Debug, Clone, Copy)]
pub struct WeightVector<'a> {
    values: &'a [f64],
    partials: &'a [f64],
    block_size: usize,
    total: f64,
}

/// Owned storage for the block partials of a [`WeightVector`] built from
/// a bare slice.
#[derive(Debug, Clone)]
pub struct BlockPartials {
    partials: Vec<f64>,
    plan: ReductionPlan,
}

impl BlockPartials {
    pub fn new(values: &[f64], plan: ReductionPlan) -> Self {
        Self {
            partials: values.chunks(plan.block_size()).map(block_sum).collect(),
            plan,
        }
    }

    pub fn weights<'a>(&'a self, values: &'a [f64]) -> WeightVector<'a> {
        WeightVector::from_parts(values, &self.partials, self.plan.block_size())
    }
}

impl<'a> WeightVector<'a> {
    pub(crate) fn from_parts(values: &'a [f64], partials: &'a [f64], block_size: usize) -> Self {
        debug_assert_eq!(partials.len(), values.len().div_ceil(block_size));
        Self {
            values,
            partials,
            block_size,
            total: combine(partials.iter().copied()),
        }
    }

    pub fn values(&self) -> &[f64] {
        self.values
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// Inverse-CDF draw: the smallest `i` whose prefix weight exceeds
/// `u * total`.
///
/// Prefixes follow the reduction tree: whole blocks are accumulated from
/// their partials, and inside the selected block the running block sum is
/// added to the preceding prefix. The prefix at the last index is therefore
/// exactly `total`, and a zero-weight index is never returned.
pub fn sample_weighted(weights: &WeightVector<'_>, u: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::InvalidRequest(format!("u = {u} is outside [0, 1)")));
    }
    let total = weights.total;
    if total == 0.0 {
        return Err(Error::DegenerateWeights);
    }
    if !total.is_finite() || total < 0.0 {
        return Err(Error::InvalidRequest(format!(
            "total weight {total} is not a finite positive number"
        )));
    }
    let target = u * total;
    let mut running = 0.0;
    for (b, &partial) in weights.partials.iter().enumerate() {
        let next = running + partial;
        if next > target {
            let start = b * weights.block_size;
            let end = (start + weights.block_size).min(weights.values.len());
            let mut local = 0.0;
            for (i, &w) in weights.values[start..end].iter().enumerate() {
                local += w;
                if running + local > target {
                    return Ok(start + i);
                }
            }
        }
        running = next;
    }
    // Only reachable if u * total rounds up to total.
    weights
        .values
        .iter()
        .rposition(|&w| w > 0.0)
        .ok_or(Error::DegenerateWeights)
}

/// Centers chosen by k-means++ and per-round bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedingResult {
    pub centers: CentroidSet,
    /// Normalizer (total D² weight) at each of the `k - 1` weighted rounds.
    pub per_round_total_weight: Vec<f64>,
    /// Rounds (1-based) where every weight was zero and a uniform draw over
    /// the not-yet-chosen points was used instead.
    pub fallback_rounds: Vec<usize>,
    /// Distance evaluations performed by each chunk of the parallel pass.
    /// Empty for the serial seeder.
    pub chunk_evals: Vec<u64>,
}

impl SeedingResult {
    pub fn indices(&self) -> Vec<usize> {
        self.centers
            .source_indices()
            .expect("seeded centers always carry source indices")
    }

    pub fn rounds(&self) -> usize {
        self.centers.k()
    }

    /// True if the degenerate-weight fallback fired in any round.
    pub fn degenerate(&self) -> bool {
        !self.fallback_rounds.is_empty()
    }

    /// Equality of everything except instrumentation.
    pub fn same_selection(&self, other: &SeedingResult) -> bool {
        self.indices() == other.indices()
            && self.fallback_rounds == other.fallback_rounds
            && self.per_round_total_weight.len() == other.per_round_total_weight.len()
            && self
                .per_round_total_weight
                .iter()
                .zip(&other.per_round_total_weight)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Serial k-means++ seeding.
pub fn seed_serial(data: &Dataset, k: usize, rng: &mut RngStream) -> Result<SeedingResult> {
    Seeder::new(data, k).run(rng)
}

/// Chunk-parallel k-means++ seeding. Produces the same result as
/// [`seed_serial`] for the same RNG state.
pub fn seed_parallel(
    data: &Dataset,
    k: usize,
    rng: &mut RngStream,
    cfg: &ExecConfig,
) -> Result<SeedingResult> {
    Seeder::new(data, k).parallel(*cfg).run(rng)
}

/// `k` distinct indices drawn uniformly, the baseline initialization.
pub fn seed_uniform(data: &Dataset, k: usize, rng: &mut RngStream) -> Result<CentroidSet> {
    check_k(data, k)?;
    let picked = rand::seq::index::sample(rng, data.n(), k).into_vec();
    CentroidSet::from_indices(data, &picked)
}

type Observer<'o> = Box<dyn FnMut(usize, &NearestDistanceTable) + 'o>;

/// Configurable seeding run.
///
/// ```
/// use pkmeans::{Dataset, RngStream, seeding::Seeder};
///
/// let data = Dataset::from_rows(&[[0.0, 0.0], [1.0, 0.0], [9.0, 9.0]]).unwrap();
/// let result = Seeder::new(&data, 2).first(0).run(&mut RngStream::new(1)).unwrap();
/// assert_eq!(result.indices()[0], 0);
/// ```
pub struct Seeder<'d, 'o> {
    data: &'d Dataset,
    k: usize,
    first: Option<usize>,
    exec: Option<ExecConfig>,
    plan: ReductionPlan,
    observer: Option<Observer<'o>>,
}

impl<'d, 'o> Seeder<'d, 'o> {
    pub fn new(data: &'d Dataset, k: usize) -> Self {
        Self {
            data,
            k,
            first: None,
            exec: None,
            plan: ReductionPlan::default(),
            observer: None,
        }
    }

    /// Forces the first center instead of drawing it.
    pub fn first(mut self, index: usize) -> Self {
        self.first = Some(index);
        self
    }

    /// Runs the update pass in parallel with `cfg`.
    pub fn parallel(mut self, cfg: ExecConfig) -> Self {
        self.exec = Some(cfg);
        self
    }

    pub fn reduction(mut self, plan: ReductionPlan) -> Self {
        self.plan = plan;
        self
    }

    /// Called after each update pass with the round number (1-based) and
    /// the refreshed table, before the next center is drawn.
    pub fn observe(mut self, f: impl FnMut(usize, &NearestDistanceTable) + 'o) -> Self {
        self.observer = Some(Box::new(f));
        self
    }

    pub fn run(mut self, rng: &mut RngStream) -> Result<SeedingResult> {
        check_k(self.data, self.k)?;
        if let Some(first) = self.first {
            if first >= self.data.n() {
                return Err(Error::InvalidRequest(format!(
                    "first center {first} out of range for {} points",
                    self.data.n()
                )));
            }
        }
        let observer = self.observer.take();
        match self.exec {
            None => {
                let pass = SerialPass {
                    data: self.data,
                    plan: self.plan,
                };
                self.drive(pass, rng, observer)
            }
            Some(cfg) => {
                cfg.validate()?;
                cfg.strategy.check_capacity(self.k, self.data.dims())?;
                let pass = ParallelPass::new(self.data, &cfg, self.plan)?;
                self.drive(pass, rng, observer)
            }
        }
    }

    fn drive<P: UpdatePass>(
        &self,
        mut pass: P,
        rng: &mut RngStream,
        mut observer: Option<Observer<'o>>,
    ) -> Result<SeedingResult> {
        let data = self.data;
        let n = data.n();
        let first = match self.first {
            Some(i) => i,
            None => rng.below(n),
        };
        let mut centers = CentroidSet::with_capacity(data.dims(), self.k);
        let mut chosen = vec![false; n];
        centers.push_indexed(data, first);
        chosen[first] = true;

        let mut table = NearestDistanceTable::new(n);
        let mut totals = Vec::with_capacity(self.k.saturating_sub(1));
        let mut fallback_rounds = Vec::new();

        for round in 1..self.k {
            let partials = pass.update(&mut table.dsq, &centers)?;
            let weights = WeightVector::from_parts(&table.dsq, &partials, self.plan.block_size());
            table.total = weights.total;
            if let Some(f) = observer.as_mut() {
                f(round, &table);
            }

            let u = rng.uniform();
            let next = match sample_weighted(&weights, u) {
                Ok(i) => i,
                Err(Error::DegenerateWeights) => {
                    fallback_rounds.push(round);
                    let remaining = n - centers.k();
                    nth_unchosen(&chosen, rng.below(remaining))
                }
                Err(e) => return Err(e),
            };
            debug_assert!(!chosen[next]);
            totals.push(weights.total);
            chosen[next] = true;
            centers.push_indexed(data, next);
        }

        Ok(SeedingResult {
            centers,
            per_round_total_weight: totals,
            fallback_rounds,
            chunk_evals: pass.into_evals(),
        })
    }
}

fn check_k(data: &Dataset, k: usize) -> Result<()> {
    if k == 0 || k > data.n() {
        return Err(Error::InvalidRequest(format!(
            "k = {k} must be between 1 and the number of points ({})",
            data.n()
        )));
    }
    Ok(())
}

fn nth_unchosen(chosen: &[bool], nth: usize) -> usize {
    chosen
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .nth(nth)
        .map(|(i, _)| i)
        .expect("fewer unchosen points than requested")
}

/// Lowers the distance table against the newest center and returns the
/// block partials of the updated table.
trait UpdatePass {
    fn update(&mut self, dsq: &mut [f64], centers: &CentroidSet) -> Result<Vec<f64>>;

    fn into_evals(self) -> Vec<u64>;
}

struct SerialPass<'d> {
    data: &'d Dataset,
    plan: ReductionPlan,
}

impl UpdatePass for SerialPass<'_> {
    fn update(&mut self, dsq: &mut [f64], centers: &CentroidSet) -> Result<Vec<f64>> {
        let center = centers.center(centers.k() - 1);
        let dims = self.data.dims();
        let bs = self.plan.block_size();
        let mut partials = Vec::with_capacity(dsq.len().div_ceil(bs));
        for (block, pts) in dsq.chunks_mut(bs).zip(self.data.points().chunks(bs * dims)) {
            let mut acc = 0.0;
            for (d, p) in block.iter_mut().zip(pts.chunks_exact(dims)) {
                let v = sq_dist(p, center);
                if v < *d {
                    *d = v;
                }
                acc += *d;
            }
            partials.push(acc);
        }
        Ok(partials)
    }

    fn into_evals(self) -> Vec<u64> {
        Vec::new()
    }
}

struct ParallelPass<'d> {
    views: WorkerViews<'d>,
    chunks: ChunkPlan,
    plan: ReductionPlan,
    pool: Arc<ThreadPool>,
    workers: usize,
    /// Chunks start on block boundaries, so each chunk can emit the block
    /// partials of its own slice during the update.
    fused: bool,
    evals: Vec<u64>,
}

impl<'d> ParallelPass<'d> {
    fn new(data: &'d Dataset, cfg: &ExecConfig, plan: ReductionPlan) -> Result<Self> {
        let chunks = plan_chunks(data.n(), cfg.chunk_size)?;
        let views = build_views(
            data,
            &CentroidSet::empty(data.dims()),
            cfg.strategy,
            cfg.workers,
        )?;
        Ok(Self {
            views,
            chunks,
            plan,
            pool: exec::pool(cfg.workers)?,
            workers: cfg.workers,
            fused: cfg.chunk_size.is_multiple_of(plan.block_size()),
            evals: vec![0; chunks.len()],
        })
    }
}

impl UpdatePass for ParallelPass<'_> {
    fn update(&mut self, dsq: &mut [f64], centers: &CentroidSet) -> Result<Vec<f64>> {
        self.views.refresh(centers)?;
        let dims = self.views.dims();
        let newest = (centers.k() - 1) * dims;
        let cs = self.chunks.chunk_size();
        let bs = self.plan.block_size();
        let fused = self.fused;
        let views = &self.views;

        let outputs: Vec<(Vec<f64>, u64)> = self.pool.install(|| {
            dsq.par_chunks_mut(cs)
                .enumerate()
                .map(|(ci, d)| {
                    let start = ci * cs;
                    let pts = &views.points()[start * dims..(start + d.len()) * dims];
                    views.with_centroids(exec::worker_index(), |c| {
                        min_update_slice(d, pts, &c[newest..newest + dims])
                    });
                    let partials = if fused {
                        d.chunks(bs).map(block_sum).collect()
                    } else {
                        Vec::new()
                    };
                    (partials, d.len() as u64)
                })
                .collect()
        });

        let mut partials = Vec::with_capacity(self.plan.num_blocks(dsq.len()));
        for (ci, (p, evals)) in outputs.into_iter().enumerate() {
            self.evals[ci] += evals;
            partials.extend(p);
        }
        if !fused {
            partials = reduce::block_partials(dsq, &self.plan, self.workers)?;
        }
        Ok(partials)
    }

    fn into_evals(self) -> Vec<u64> {
        self.evals
    }
}
