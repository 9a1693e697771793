use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::LayoutStrategy;

/// Column header of a timing report CSV.
pub const REPORT_HEADER: &str =
    "scenario,n_points,k,strategy,workers,chunk_size,phase,trial,wall_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Seeding,
    Clustering,
    Total,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Phase::Seeding => "seeding",
            Phase::Clustering => "clustering",
            Phase::Total => "total",
        })
    }
}

/// One timed phase of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub scenario: String,
    pub n_points: usize,
    pub k: usize,
    pub strategy: String,
    pub workers: usize,
    pub chunk_size: usize,
    pub phase: Phase,
    pub trial: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvHeader {
    pub cores: usize,
    /// Seconds since the Unix epoch when the run started.
    pub timestamp: u64,
}

impl EnvHeader {
    pub fn capture() -> Self {
        Self {
            cores: crate::config::available_cores(),
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

impl fmt::Display for EnvHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "cores={}", self.cores)?;
        writeln!(f, "timestamp={}", self.timestamp)
    }
}

/// Center indices chosen in one cell, kept to check reproducibility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionRecord {
    pub n_points: usize,
    pub k: usize,
    pub strategy: LayoutStrategy,
    pub workers: usize,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub env: EnvHeader,
    pub rows: Vec<TimingRow>,
    pub selections: Vec<SelectionRecord>,
}

impl TimingReport {
    pub fn new(env: EnvHeader) -> Self {
        Self {
            env,
            rows: Vec::new(),
            selections: Vec::new(),
        }
    }

    /// Writes the header row followed by one line per timing row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        if self.rows.is_empty() {
            w.write_record(REPORT_HEADER.split(','))?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads rows written by [`write_csv`](Self::write_csv). The environment
    /// header is not part of the CSV and is left at its default.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header.join(",") != REPORT_HEADER {
            return Err(Error::Parse(format!(
                "unexpected report header {:?}",
                header.join(",")
            )));
        }
        let rows = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<TimingRow>, _>>()?;
        Ok(Self {
            env: EnvHeader {
                cores: 0,
                timestamp: 0,
            },
            rows,
            selections: Vec::new(),
        })
    }
}

/// Everything that identifies a cell except the trial number.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub scenario: String,
    pub n_points: usize,
    pub k: usize,
    pub strategy: String,
    pub workers: usize,
    pub chunk_size: usize,
    pub phase: Phase,
}

impl CellKey {
    fn of(row: &TimingRow) -> Self {
        Self {
            scenario: row.scenario.clone(),
            n_points: row.n_points,
            k: row.k,
            strategy: row.strategy.clone(),
            workers: row.workers,
            chunk_size: row.chunk_size,
            phase: row.phase,
        }
    }

    fn is_baseline(&self) -> bool {
        self.workers == 1 && self.strategy == LayoutStrategy::SharedMutable.name()
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} n={} k={} strategy={} workers={} chunk={} phase={}",
            self.scenario,
            self.n_points,
            self.k,
            self.strategy,
            self.workers,
            self.chunk_size,
            self.phase
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub cell: CellKey,
    pub trials: usize,
    pub mean_ms: f64,
    pub min_ms: f64,
    /// Baseline mean over this cell's mean.
    pub speedup: f64,
    /// Percent improvement over the shared-store cell with the same workers,
    /// when that cell exists.
    pub strategy_delta_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    /// Seeding cells slower than the serial baseline, the small-workload
    /// crossover region.
    pub fn crossover(&self) -> Vec<&SummaryRow> {
        self.rows
            .iter()
            .filter(|r| r.cell.phase == Phase::Seeding && !r.cell.is_baseline() && r.speedup < 1.0)
            .collect()
    }

    pub fn find(
        &self,
        n_points: usize,
        k: usize,
        strategy: &str,
        workers: usize,
        phase: Phase,
    ) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| {
            r.cell.n_points == n_points
                && r.cell.k == k
                && r.cell.strategy == strategy
                && r.cell.workers == workers
                && r.cell.phase == phase
        })
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:>9} {:>5} {:<10} {:>7} {:<10} {:>6} {:>10} {:>10} {:>8} {:>8}",
            "scenario",
            "n",
            "k",
            "strategy",
            "workers",
            "phase",
            "trials",
            "mean_ms",
            "min_ms",
            "speedup",
            "delta%"
        )?;
        for r in &self.rows {
            let delta = r
                .strategy_delta_pct
                .map(|d| format!("{d:.1}"))
                .unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "{:<10} {:>9} {:>5} {:<10} {:>7} {:<10} {:>6} {:>10.3} {:>10.3} {:>8.2} {:>8}",
                r.cell.scenario,
                r.cell.n_points,
                r.cell.k,
                r.cell.strategy,
                r.cell.workers,
                r.cell.phase,
                r.trials,
                r.mean_ms,
                r.min_ms,
                r.speedup,
                delta
            )?;
        }
        let cross = self.crossover();
        if cross.is_empty() {
            writeln!(
                f,
                "crossover: parallel seeding beat the serial baseline in every cell"
            )?;
        } else {
            for r in cross {
                writeln!(
                    f,
                    "crossover: serial faster at n={} k={} ({} x{}, speedup {:.2})",
                    r.cell.n_points, r.cell.k, r.cell.strategy, r.cell.workers, r.speedup
                )?;
            }
        }
        Ok(())
    }
}

/// Mean and min wall time per cell, speedup over the serial baseline and
/// the delta against the shared-store strategy.
pub fn summarize(report: &TimingReport) -> Result<Summary> {
    let mut cells: BTreeMap<CellKey, Vec<f64>> = BTreeMap::new();
    for row in &report.rows {
        cells.entry(CellKey::of(row)).or_default().push(row.wall_ms);
    }
    let stats: BTreeMap<&CellKey, (usize, f64, f64)> = cells
        .iter()
        .map(|(k, v)| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            (k, (v.len(), mean, min))
        })
        .collect();

    let same_point = |a: &CellKey, b: &CellKey| {
        a.scenario == b.scenario && a.n_points == b.n_points && a.k == b.k && a.phase == b.phase
    };

    let mut rows = Vec::with_capacity(stats.len());
    for (&cell, &(trials, mean_ms, min_ms)) in &stats {
        let baseline = stats
            .iter()
            .find(|(k, _)| k.is_baseline() && same_point(k, cell))
            .map(|(_, s)| s.1)
            .ok_or_else(|| Error::MissingBaseline(cell.to_string()))?;
        let global = stats
            .iter()
            .find(|(k, _)| {
                same_point(k, cell)
                    && k.workers == cell.workers
                    && k.strategy == LayoutStrategy::SharedMutable.name()
            })
            .map(|(_, s)| s.1);
        rows.push(SummaryRow {
            cell: cell.clone(),
            trials,
            mean_ms,
            min_ms,
            speedup: baseline / mean_ms,
            strategy_delta_pct: global.map(|g| (g - mean_ms) / g * 100.0),
        });
    }
    Ok(Summary { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(strategy: &str, workers: usize, trial: usize, ms: f64) -> TimingRow {
        TimingRow {
            scenario: "clusters".into(),
            n_points: 1000,
            k: 10,
            strategy: strategy.into(),
            workers,
            chunk_size: 1024,
            phase: Phase::Seeding,
            trial,
            wall_ms: ms,
        }
    }

    fn report(rows: Vec<TimingRow>) -> TimingReport {
        TimingReport {
            env: EnvHeader {
                cores: 4,
                timestamp: 0,
            },
            rows,
            selections: Vec::new(),
        }
    }

    #[test]
    fn speedup_is_baseline_over_cell() {
        let r = report(vec![row("shared", 1, 0, 100.0), row("shared", 4, 0, 25.0)]);
        let s = summarize(&r).unwrap();
        let par = s.find(1000, 10, "shared", 4, Phase::Seeding).unwrap();
        assert_eq!(par.speedup, 4.0);
        assert_eq!(par.strategy_delta_pct, Some(0.0));
    }

    #[test]
    fn identical_timings_have_zero_delta() {
        let r = report(vec![
            row("shared", 1, 0, 50.0),
            row("shared", 4, 0, 20.0),
            row("arena", 4, 0, 20.0),
        ]);
        let s = summarize(&r).unwrap();
        assert_eq!(
            s.find(1000, 10, "arena", 4, Phase::Seeding)
                .unwrap()
                .strategy_delta_pct,
            Some(0.0)
        );
    }

    #[test]
    fn means_and_deltas_match_hand_computation() {
        let r = report(vec![
            row("shared", 1, 0, 90.0),
            row("shared", 1, 1, 110.0),
            row("shared", 2, 0, 60.0),
            row("shared", 2, 1, 40.0),
            row("replicated", 2, 0, 44.0),
            row("replicated", 2, 1, 46.0),
            row("arena", 2, 0, 30.0),
            row("arena", 2, 1, 50.0),
        ]);
        let s = summarize(&r).unwrap();
        // baseline mean 100; shared x2 mean 50; replicated mean 45; arena mean 40
        let shared = s.find(1000, 10, "shared", 2, Phase::Seeding).unwrap();
        assert_eq!(
            (shared.mean_ms, shared.min_ms, shared.speedup),
            (50.0, 40.0, 2.0)
        );
        let rep = s.find(1000, 10, "replicated", 2, Phase::Seeding).unwrap();
        assert_eq!(rep.mean_ms, 45.0);
        assert!((rep.strategy_delta_pct.unwrap() - 10.0).abs() < 1e-12);
        let arena = s.find(1000, 10, "arena", 2, Phase::Seeding).unwrap();
        assert_eq!(
            (arena.mean_ms, arena.min_ms, arena.speedup),
            (40.0, 30.0, 2.5)
        );
        assert!((arena.strategy_delta_pct.unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(shared.trials, 2);
        assert!(s.crossover().is_empty());
    }

    #[test]
    fn missing_baseline_names_cell() {
        let r = report(vec![row("arena", 4, 0, 10.0)]);
        let err = summarize(&r).unwrap_err();
        match err {
            Error::MissingBaseline(cell) => {
                assert!(cell.contains("arena") && cell.contains("k=10"), "{cell}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn crossover_lists_slower_cells() {
        let r = report(vec![row("shared", 1, 0, 10.0), row("shared", 8, 0, 12.5)]);
        let s = summarize(&r).unwrap();
        assert_eq!(s.crossover().len(), 1);
        assert!(s.to_string().contains("crossover: serial faster"));
    }

    #[test]
    fn csv_header_and_round_trip() {
        let mut r = report(vec![row("shared", 1, 0, 1.25), row("arena", 2, 1, 0.5)]);
        r.rows[1].phase = Phase::Total;
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), REPORT_HEADER);
        assert!(text.contains(",total,"));
        let back = TimingReport::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.rows, r.rows);

        let mut empty = Vec::new();
        report(vec![]).write_csv(&mut empty).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim(), REPORT_HEADER);
    }
}
