use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use super::generate::generate_points;
use super::report::{EnvHeader, Phase, SelectionRecord, TimingReport, TimingRow};
use crate::chunk::DEFAULT_CHUNK_SIZE;
use crate::cluster::{lloyd, LloydParams};
use crate::config::ExecConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::layout::LayoutStrategy;
use crate::rng::RngStream;
use crate::seeding::{seed_parallel, seed_serial, SeedingResult};

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Vary k with n fixed.
    Clusters,
    /// Vary n with k fixed.
    Points,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            SweepAxis::Clusters => "clusters",
            SweepAxis::Points => "points",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clusters" => Ok(SweepAxis::Clusters),
            "points" => Ok(SweepAxis::Points),
            other => Err(Error::Parse(format!(
                "unknown sweep {other:?} (expected clusters or points)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub axis: SweepAxis,
    /// n for a clusters sweep, k for a points sweep.
    pub fixed: usize,
    pub values: Vec<usize>,
    pub strategies: Vec<LayoutStrategy>,
    pub workers: Vec<usize>,
    pub chunk_size: usize,
    pub trials: usize,
    pub rng_seed: u64,
    pub dims: usize,
    pub blobs: usize,
    pub spread: f64,
    /// Lloyd settings, or `None` to time seeding only.
    pub lloyd: Option<LloydParams>,
    /// Upper bound on working memory in bytes. `None` uses the memory the
    /// OS reports as available, when it reports any.
    pub memory_limit: Option<u64>,
}

impl ScenarioSpec {
    fn base(axis: SweepAxis, fixed: usize, values: Vec<usize>) -> Self {
        let cores = crate::config::available_cores();
        let mut workers = vec![1];
        if cores > 1 {
            workers.push(cores);
        }
        Self {
            axis,
            fixed,
            values,
            strategies: LayoutStrategy::ALL.to_vec(),
            workers,
            chunk_size: DEFAULT_CHUNK_SIZE,
            trials: 3,
            rng_seed: 0,
            dims: 2,
            blobs: 16,
            spread: 2.0,
            lloyd: None,
            memory_limit: None,
        }
    }

    /// k from 10 to 100 at n = 400,000.
    pub fn desk_clusters() -> Self {
        Self::base(SweepAxis::Clusters, 400_000, vec![10, 25, 50, 75, 100])
    }

    /// n from 100,000 to 1,000,000 at k = 50.
    pub fn desk_points() -> Self {
        Self::base(
            SweepAxis::Points,
            50,
            (1..=10).map(|i| i * 100_000).collect(),
        )
    }

    /// The same sweeps at 10x the desk point counts.
    pub fn full_scale(mut self) -> Self {
        match self.axis {
            SweepAxis::Clusters => self.fixed *= 10,
            SweepAxis::Points => self.values.iter_mut().for_each(|v| *v *= 10),
        }
        self
    }

    pub fn id(&self) -> String {
        self.axis.to_string()
    }

    /// `(n, k)` for each axis value.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.values
            .iter()
            .map(|&v| match self.axis {
                SweepAxis::Clusters => (self.fixed, v),
                SweepAxis::Points => (v, self.fixed),
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRequest(m));
        if self.values.is_empty() {
            return bad("sweep needs at least one axis value".into());
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!(
                "axis values must be strictly increasing: {:?}",
                self.values
            ));
        }
        if self.values.contains(&0) || self.fixed == 0 {
            return bad("axis and fixed values must be positive".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.strategies.is_empty() || self.workers.is_empty() {
            return bad("at least one strategy and one worker count are required".into());
        }
        if self.workers.contains(&0) || self.chunk_size == 0 || self.dims == 0 || self.blobs == 0 {
            return bad("workers, chunk size, dims and blobs must be positive".into());
        }
        for (n, k) in self.cells() {
            if k > n {
                return bad(format!("k = {k} exceeds n = {n}"));
            }
            if n < self.blobs {
                return bad(format!("n = {n} is smaller than blobs = {}", self.blobs));
            }
            for s in &self.strategies {
                s.check_capacity(k, self.dims)?;
            }
        }
        Ok(())
    }

    /// Rough peak working set for the largest cell.
    pub fn estimated_bytes(&self) -> u64 {
        let n = self.cells().iter().map(|c| c.0).max().unwrap_or(0) as u64;
        let point_bytes = n * self.dims as u64 * 8;
        let arena = if self.strategies.contains(&LayoutStrategy::ReadOnlyArena) {
            point_bytes
        } else {
            0
        };
        let lloyd = if self.lloyd.is_some() { n * 16 } else { 0 };
        point_bytes + arena + n * 8 + n + lloyd
    }
}

fn available_memory() -> Option<u64> {
    let info = std::fs::read_to_string("/proc/meminfo").ok()?;
    info.lines()
        .find_map(|l| l.strip_prefix("MemAvailable:"))
        .and_then(|rest| {
            rest.trim()
                .trim_end_matches("kB")
                .trim()
                .parse::<u64>()
                .ok()
        })
        .map(|kb| kb * 1024)
}

/// Runs every cell of `spec` sequentially and records one row per phase per
/// trial.
///
/// The workers=1 shared-store cell runs the serial seeder; every other cell
/// runs the parallel seeder. Seeding time includes view construction.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<TimingReport> {
    spec.validate()?;
    let needed = spec.estimated_bytes();
    if let Some(limit) = spec.memory_limit.or_else(available_memory) {
        if needed > limit {
            return Err(Error::Resource(format!(
                "scenario needs about {needed} bytes but only {limit} are available"
            )));
        }
    }

    let mut report = TimingReport::new(EnvHeader::capture());
    let id = spec.id();
    let data_rng = RngStream::new(spec.rng_seed).fork(0);
    for (n, k) in spec.cells() {
        let data = generate_points(n, spec.dims, spec.blobs, spec.spread, &mut data_rng.clone())?;
        for &strategy in &spec.strategies {
            for &workers in &spec.workers {
                let cfg = ExecConfig::default()
                    .with_workers(workers)
                    .with_chunk_size(spec.chunk_size)
                    .with_strategy(strategy)
                    .with_seed(spec.rng_seed);
                for trial in 0..spec.trials {
                    let (seeded, seed_ms) = timed(|| seed_once(&data, k, &cfg))?;
                    let row = |phase, wall_ms| TimingRow {
                        scenario: id.clone(),
                        n_points: n,
                        k,
                        strategy: strategy.name().to_owned(),
                        workers,
                        chunk_size: spec.chunk_size,
                        phase,
                        trial,
                        wall_ms,
                    };
                    let seeding = row(Phase::Seeding, seed_ms);
                    let mut rows = vec![seeding];
                    let mut total = seed_ms;
                    if let Some(params) = spec.lloyd {
                        let (_, cluster_ms) =
                            timed(|| lloyd(&data, &seeded.centers, params, &cfg))?;
                        rows.push(row(Phase::Clustering, cluster_ms));
                        total += cluster_ms;
                    }
                    rows.push(row(Phase::Total, total));
                    report.rows.extend(rows);
                    if trial == 0 {
                        report.selections.push(SelectionRecord {
                            n_points: n,
                            k,
                            strategy,
                            workers,
                            indices: seeded.indices(),
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

fn seed_once(data: &Dataset, k: usize, cfg: &ExecConfig) -> Result<SeedingResult> {
    let mut rng = RngStream::new(cfg.rng_seed);
    if cfg.workers == 1 && cfg.strategy == LayoutStrategy::SharedMutable {
        seed_serial(data, k, &mut rng)
    } else {
        seed_parallel(data, k, &mut rng, cfg)
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64() * 1e3))
}
