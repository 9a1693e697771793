//! Data-parallel k-means++.
//!
//! The crate provides serial and chunk-parallel k-means++ seeding that
//! produce bit-identical centers, a fixed-tree parallel sum, Lloyd
//! clustering, three data-placement strategies for the parallel pass, and
//! a benchmark harness that sweeps cluster and point counts.
//!
//! Every parallel algorithm here is a pure function of its input and RNG
//! seed: worker count, chunk size and layout strategy change timing only.

pub mod bench;
pub mod chunk;
pub mod cluster;
pub mod config;
pub mod data;
mod error;
pub mod exec;
pub mod io;
pub mod layout;
pub mod reduce;
pub mod rng;
pub mod seeding;

pub use chunk::{plan_chunks, ChunkPlan};
pub use cluster::{assign, lloyd, update_centroids, Assignment, ClusteringResult, LloydParams};
pub use config::ExecConfig;
pub use data::{squared_distance, CentroidSet, Dataset};
pub use error::{Error, Result};
pub use layout::{
    build_views, strategy_equivalence_audit, AuditReport, LayoutStrategy, WorkerViews,
};
pub use reduce::{parallel_min_update, parallel_sum, ReductionPlan};
pub use rng::RngStream;
pub use seeding::{
    sample_weighted, seed_parallel, seed_serial, NearestDistanceTable, SeedingResult, WeightVector,
};
