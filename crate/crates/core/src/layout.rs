//! Placement of points and centroids for the parallel pass.
//!
//! Three strategies mirror the GPU memory kinds a CUDA k-means++ kernel can
//! read from:
//!
//! - [`LayoutStrategy::SharedMutable`] (global memory): workers read the
//!   caller's point buffer and one lock-guarded centroid store.
//! - [`LayoutStrategy::ReplicatedCentroids`] (constant memory): each worker
//!   holds a private copy of the centroid list, capped at 64 KiB and
//!   refreshed once per round.
//! - [`LayoutStrategy::ReadOnlyArena`] (texture memory): points are sealed
//!   into an immutable arena once, before the first round; centroids are a
//!   plain shared slice.
//!
//! Strategies change placement and timing only. Every algorithm produces the
//! same bits under all three.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use crate::config::ExecConfig;
use crate::data::{CentroidSet, Dataset};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::seeding::seed_parallel;

/// Per-worker centroid copy budget, the size of CUDA constant memory.
pub const REPLICA_BUDGET_BYTES: usize = 64 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub enum LayoutStrategy {
    #[default]
    SharedMutable,
    ReplicatedCentroids,
    ReadOnlyArena,
}

impl LayoutStrategy {
    pub const ALL: [LayoutStrategy; 3] = [
        LayoutStrategy::SharedMutable,
        LayoutStrategy::ReplicatedCentroids,
        LayoutStrategy::ReadOnlyArena,
    ];

    /// Short name used on the command line and in reports.
    pub fn name(self) -> &'static str {
        match self {
            LayoutStrategy::SharedMutable => "shared",
            LayoutStrategy::ReplicatedCentroids => "replicated",
            LayoutStrategy::ReadOnlyArena => "arena",
        }
    }

    /// Fails if `k` centers of `dims` coordinates cannot be replicated
    /// under this strategy.
    pub fn check_capacity(self, k: usize, dims: usize) -> Result<()> {
        if self != LayoutStrategy::ReplicatedCentroids {
            return Ok(());
        }
        let required = k
            .saturating_mul(dims)
            .saturating_mul(std::mem::size_of::<f64>());
        if required > REPLICA_BUDGET_BYTES {
            return Err(Error::CapacityExceeded {
                k,
                dims,
                required,
                limit: REPLICA_BUDGET_BYTES,
            });
        }
        Ok(())
    }
}

impl fmt::Display for LayoutStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for LayoutStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shared" | "global" | "shared-mutable" => Ok(LayoutStrategy::SharedMutable),
            "replicated" | "constant" | "replicated-centroids" => {
                Ok(LayoutStrategy::ReplicatedCentroids)
            }
            "arena" | "texture" | "read-only-arena" => Ok(LayoutStrategy::ReadOnlyArena),
            other => Err(Error::Parse(format!(
                "unknown strategy {other:?} (expected shared, replicated or arena)"
            ))),
        }
    }
}

/// What a set of views placed where, for instrumentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub strategy: LayoutStrategy,
    pub workers: usize,
    /// Bytes of point data copied into a sealed arena (once, not per worker).
    pub arena_bytes: usize,
    /// Bytes of the private centroid copy each worker currently holds.
    pub replica_bytes_per_worker: usize,
    /// Number of centroid refreshes since construction.
    pub refreshes: usize,
}

enum PointStore<'a> {
    Borrowed(&'a [f64]),
    Arena(Arc<[f64]>),
}

enum CentroidStore {
    Shared(RwLock<Vec<f64>>),
    Replicated(Vec<Vec<f64>>),
    Sealed(Vec<f64>),
}

/// Read handles handed to the workers of one parallel pass.
pub struct WorkerViews<'a> {
    points: PointStore<'a>,
    centroids: CentroidStore,
    dims: usize,
    placement: Placement,
}

impl fmt::Debug for WorkerViews<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WorkerViews")
            .field("dims", &self.dims)
            .field("placement", &self.placement)
            .finish_non_exhaustive()
    }
}

/// Places `data` and `centers` for `workers` workers according to `strategy`.
pub fn build_views<'a>(
    data: &'a Dataset,
    centers: &CentroidSet,
    strategy: LayoutStrategy,
    workers: usize,
) -> Result<WorkerViews<'a>> {
    if workers == 0 {
        return Err(Error::InvalidRequest("workers must be positive".into()));
    }
    if centers.dims() != data.dims() {
        return Err(Error::DimensionMismatch {
            expected: data.dims(),
            actual: centers.dims(),
        });
    }
    strategy.check_capacity(centers.k(), centers.dims())?;

    let coords = centers.coords().to_vec();
    let (points, centroids, arena_bytes, replica_bytes) = match strategy {
        LayoutStrategy::SharedMutable => (
            PointStore::Borrowed(data.points()),
            CentroidStore::Shared(RwLock::new(coords)),
            0,
            0,
        ),
        LayoutStrategy::ReplicatedCentroids => {
            let bytes = coords.len() * std::mem::size_of::<f64>();
            (
                PointStore::Borrowed(data.points()),
                CentroidStore::Replicated(vec![coords; workers]),
                0,
                bytes,
            )
        }
        LayoutStrategy::ReadOnlyArena => (
            PointStore::Arena(Arc::from(data.points())),
            CentroidStore::Sealed(coords),
            data.size_bytes(),
            0,
        ),
    };
    Ok(WorkerViews {
        points,
        centroids,
        dims: data.dims(),
        placement: Placement {
            strategy,
            workers,
            arena_bytes,
            replica_bytes_per_worker: replica_bytes,
            refreshes: 0,
        },
    })
}

impl<'a> WorkerViews<'a> {
    pub fn strategy(&self) -> LayoutStrategy {
        self.placement.strategy
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Row-major point coordinates as seen by every worker.
    #[inline]
    pub fn points(&self) -> &[f64] {
        match &self.points {
            PointStore::Borrowed(p) => p,
            PointStore::Arena(a) => a,
        }
    }

    /// True if all workers read the same centroid buffer.
    pub fn shares_centroids(&self) -> bool {
        !matches!(self.centroids, CentroidStore::Replicated(_))
    }

    /// Publishes a new centroid list to every worker. Runs on the
    /// coordinator between parallel passes.
    pub fn refresh(&mut self, centers: &CentroidSet) -> Result<()> {
        if centers.dims() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                actual: centers.dims(),
            });
        }
        self.placement
            .strategy
            .check_capacity(centers.k(), centers.dims())?;
        let src = centers.coords();
        match &mut self.centroids {
            CentroidStore::Shared(lock) => {
                let mut guard = lock.write().unwrap_or_else(|e| e.into_inner());
                guard.clear();
                guard.extend_from_slice(src);
            }
            CentroidStore::Replicated(copies) => {
                for copy in copies.iter_mut() {
                    copy.clear();
                    copy.extend_from_slice(src);
                }
                self.placement.replica_bytes_per_worker = std::mem::size_of_val(src);
            }
            CentroidStore::Sealed(coords) => {
                coords.clear();
                coords.extend_from_slice(src);
            }
        }
        self.placement.refreshes += 1;
        Ok(())
    }

    /// Runs `f` with worker `worker`'s view of the centroid coordinates.
    #[inline]
    pub fn with_centroids<R>(&self, worker: usize, f: impl FnOnce(&[f64]) -> R) -> R {
        match &self.centroids {
            CentroidStore::Shared(lock) => {
                let guard = lock.read().unwrap_or_else(|e| e.into_inner());
                f(&guard)
            }
            CentroidStore::Replicated(copies) => f(&copies[worker % copies.len()]),
            CentroidStore::Sealed(coords) => f(coords),
        }
    }

    /// Address of worker `worker`'s centroid buffer; distinct per worker
    /// only under replication.
    pub fn centroid_buffer_addr(&self, worker: usize) -> usize {
        self.with_centroids(worker, |c| c.as_ptr() as usize)
    }
}

/// Outcome of running seeding under every layout strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub indices: Vec<(LayoutStrategy, Vec<usize>)>,
    pub passed: bool,
}

/// Seeds `data` under all three strategies and reports whether the chosen
/// indices agree. A disagreement is reported, not returned as an error.
pub fn strategy_equivalence_audit(data: &Dataset, k: usize, seed: u64) -> Result<AuditReport> {
    let workers = crate::config::available_cores().clamp(2, 4);
    let mut indices = Vec::with_capacity(LayoutStrategy::ALL.len());
    for strategy in LayoutStrategy::ALL {
        let cfg = ExecConfig::default()
            .with_workers(workers)
            .with_strategy(strategy)
            .with_seed(seed);
        let mut rng = RngStream::new(seed);
        let result = seed_parallel(data, k, &mut rng, &cfg)?;
        indices.push((strategy, result.indices()));
    }
    let passed = indices.windows(2).all(|w| w[0].1 == w[1].1);
    Ok(AuditReport {
        n: data.n(),
        k,
        seed,
        indices,
        passed,
    })
}
