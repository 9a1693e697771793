//! Lloyd clustering after seeding.

use rayon::prelude::*;

use crate::config::ExecConfig;
use crate::data::{sq_dist, CentroidSet, Dataset};
use crate::error::{Error, Result};
use crate::exec;
use crate::layout::build_views;
use crate::reduce::{self, ReductionPlan};

/// Nearest-centroid labels with each point's squared distance to its label.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub labels: Vec<usize>,
    pub dsq: Vec<f64>,
    /// Fixed-tree sum of `dsq`.
    pub cost: f64,
}

/// Labels every point with its nearest centroid; ties go to the lowest
/// centroid index.
pub fn assign(data: &Dataset, centroids: &CentroidSet, cfg: &ExecConfig) -> Result<Assignment> {
    cfg.validate()?;
    if centroids.is_empty() {
        return Err(Error::InvalidRequest(
            "at least one centroid is required".into(),
        ));
    }
    let views = build_views(data, centroids, cfg.strategy, cfg.workers)?;
    let n = data.n();
    let dims = data.dims();
    let cs = cfg.chunk_size;
    let mut labels = vec![0usize; n];
    let mut dsq = vec![0.0f64; n];

    let pool = exec::pool(cfg.workers)?;
    pool.install(|| {
        labels
            .par_chunks_mut(cs)
            .zip(dsq.par_chunks_mut(cs))
            .enumerate()
            .for_each(|(ci, (lab, dist))| {
                let start = ci * cs;
                let pts = &views.points()[start * dims..(start + lab.len()) * dims];
                views.with_centroids(exec::worker_index(), |cents| {
                    for ((l, d), p) in lab
                        .iter_mut()
                        .zip(dist.iter_mut())
                        .zip(pts.chunks_exact(dims))
                    {
                        let (best, best_d) = nearest(p, cents, dims);
                        *l = best;
                        *d = best_d;
                    }
                });
            });
    });

    let cost = reduce::parallel_sum(&dsq, &ReductionPlan::default(), cfg.workers)?;
    Ok(Assignment { labels, dsq, cost })
}

#[inline]
fn nearest(p: &[f64], cents: &[f64], dims: usize) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, cent) in cents.chunks_exact(dims).enumerate() {
        let d = sq_dist(p, cent);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    (best, best_d)
}

/// Mean of each cluster's points.
///
/// Per-cluster coordinate sums use the fixed reduction tree over point
/// blocks. An empty cluster is moved onto the point farthest from its
/// assigned centroid; each point is used for at most one empty cluster.
pub fn update_centroids(
    data: &Dataset,
    assignment: &Assignment,
    k: usize,
    workers: usize,
) -> Result<CentroidSet> {
    let n = data.n();
    let dims = data.dims();
    if k == 0 {
        return Err(Error::InvalidRequest("k must be positive".into()));
    }
    if assignment.labels.len() != n || assignment.dsq.len() != n {
        return Err(Error::InvalidRequest(format!(
            "assignment covers {} points, dataset has {}",
            assignment.labels.len(),
            n
        )));
    }
    if let Some(&bad) = assignment.labels.iter().find(|&&l| l >= k) {
        return Err(Error::InvalidRequest(format!(
            "label {bad} out of range for k = {k}"
        )));
    }

    let bs = ReductionPlan::default().block_size();
    let pool = exec::pool(workers)?;
    let blocks: Vec<(Vec<f64>, Vec<usize>)> = pool.install(|| {
        assignment
            .labels
            .par_chunks(bs)
            .zip(data.points().par_chunks(bs * dims))
            .map(|(lab, pts)| {
                let mut sums = vec![0.0; k * dims];
                let mut counts = vec![0usize; k];
                for (&l, p) in lab.iter().zip(pts.chunks_exact(dims)) {
                    counts[l] += 1;
                    for (s, x) in sums[l * dims..(l + 1) * dims].iter_mut().zip(p) {
                        *s += x;
                    }
                }
                (sums, counts)
            })
            .collect()
    });

    let mut sums = vec![0.0; k * dims];
    let mut counts = vec![0usize; k];
    for (bsums, bcounts) in &blocks {
        for (s, b) in sums.iter_mut().zip(bsums) {
            *s += b;
        }
        for (c, b) in counts.iter_mut().zip(bcounts) {
            *c += b;
        }
    }

    let mut coords = sums;
    let mut used = vec![false; n];
    for c in 0..k {
        let slot = &mut coords[c * dims..(c + 1) * dims];
        if counts[c] > 0 {
            let inv = counts[c] as f64;
            slot.iter_mut().for_each(|s| *s /= inv);
        } else {
            let far = farthest_unused(&assignment.dsq, &used).ok_or_else(|| {
                Error::InvalidRequest(format!("no point left to reseed empty cluster {c}"))
            })?;
            used[far] = true;
            slot.copy_from_slice(data.point(far));
        }
    }
    CentroidSet::from_coords(coords, dims)
}

fn farthest_unused(dsq: &[f64], used: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (&d, &u)) in dsq.iter().zip(used).enumerate() {
        if u {
            continue;
        }
        match best {
            Some((_, bd)) if d <= bd => {}
            _ => best = Some((i, d)),
        }
    }
    best.map(|(i, _)| i)
}

/// Stopping rule for [`lloyd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LloydParams {
    pub max_iter: usize,
    /// Largest squared centroid displacement treated as converged.
    pub tol: f64,
}

impl Default for LloydParams {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub labels: Vec<usize>,
    pub centroids: CentroidSet,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Cost of every assignment step, ending with the returned labels.
    pub cost_history: Vec<f64>,
}

/// Alternates [`assign`] and [`update_centroids`] from `init` until the
/// largest squared centroid move is at most `params.tol` or
/// `params.max_iter` updates have run.
pub fn lloyd(
    data: &Dataset,
    init: &CentroidSet,
    params: LloydParams,
    cfg: &ExecConfig,
) -> Result<ClusteringResult> {
    if init.is_empty() {
        return Err(Error::InvalidRequest(
            "at least one initial centroid is required".into(),
        ));
    }
    if params.max_iter == 0 {
        return Err(Error::InvalidRequest("max_iter must be at least 1".into()));
    }
    if params.tol.is_nan() || params.tol < 0.0 {
        return Err(Error::InvalidRequest("tol must be nonnegative".into()));
    }
    if init.dims() != data.dims() {
        return Err(Error::DimensionMismatch {
            expected: data.dims(),
            actual: init.dims(),
        });
    }
    let k = init.k();
    let mut centroids = init.clone();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < params.max_iter {
        let a = assign(data, &centroids, cfg)?;
        history.push(a.cost);
        let next = update_centroids(data, &a, k, cfg.workers)?;
        let shift = centroids
            .iter()
            .zip(next.iter())
            .map(|(old, new)| sq_dist(old, new))
            .fold(0.0, f64::max);
        centroids = next;
        iterations += 1;
        if shift <= params.tol {
            converged = true;
            break;
        }
    }

    let last = assign(data, &centroids, cfg)?;
    history.push(last.cost);
    Ok(ClusteringResult {
        labels: last.labels,
        centroids,
        cost: last.cost,
        iterations,
        converged,
        cost_history: history,
    })
}
