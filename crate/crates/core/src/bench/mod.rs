//! Benchmark scenarios: synthetic data, timed sweeps and summaries.

mod generate;
mod report;
mod scenario;

pub use generate::{generate_from_centers, generate_labeled, generate_points, LabeledPoints};
pub use report::{
    summarize, CellKey, EnvHeader, Phase, SelectionRecord, Summary, SummaryRow, TimingReport,
    TimingRow, REPORT_HEADER,
};
pub use scenario::{run_scenario, ScenarioSpec, SweepAxis};
