use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pkmeans::bench::{self, ScenarioSpec, SweepAxis};
use pkmeans::cluster::{lloyd, LloydParams};
use pkmeans::config::available_cores;
use pkmeans::seeding::SeedingResult;
use pkmeans::{io as pio, Dataset, Error, ExecConfig, LayoutStrategy, RngStream};

const EXIT_INVALID: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "pkmeans",
    version,
    about = "Data-parallel k-means++ seeding and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Choose k initial centers with k-means++.
    Seed {
        #[command(flatten)]
        run: RunArgs,
        /// Output CSV, one center per line (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seed with k-means++ and run Lloyd iterations.
    Cluster {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Output file, one label per line (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time a clusters or points sweep and write a timing report.
    Bench(BenchArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["input", "gen"]))]
struct RunArgs {
    /// Point file: CSV, or raw binary for .bin/.f64/.dat.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Synthetic points, e.g. n=100000,blobs=8,spread=1.5[,dims=2].
    #[arg(long)]
    gen: Option<GenSpec>,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Mode::Parallel)]
    mode: Mode,
    /// Worker threads (defaults to available cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = 1024)]
    chunk_size: usize,
    #[arg(long, default_value = "shared", value_parser = parse_strategy)]
    strategy: LayoutStrategy,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Serial,
    Parallel,
}

#[derive(Clone, Debug)]
struct GenSpec {
    n: usize,
    blobs: usize,
    spread: f64,
    dims: usize,
}

impl std::str::FromStr for GenSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut spec = GenSpec {
            n: 0,
            blobs: 8,
            spread: 1.0,
            dims: 2,
        };
        for part in s.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
            let bad = |e: &dyn std::fmt::Display| format!("{key}: {e}");
            match key.trim() {
                "n" => spec.n = value.parse().map_err(|e| bad(&e))?,
                "blobs" => spec.blobs = value.parse().map_err(|e| bad(&e))?,
                "spread" => spec.spread = value.parse().map_err(|e| bad(&e))?,
                "dims" => spec.dims = value.parse().map_err(|e| bad(&e))?,
                other => return Err(format!("unknown generator key {other:?}")),
            }
        }
        if spec.n == 0 {
            return Err("n must be given and positive".into());
        }
        Ok(spec)
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_parser = parse_axis)]
    sweep: SweepAxis,
    /// n for a clusters sweep, k for a points sweep.
    #[arg(long)]
    fixed: Option<usize>,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_strategy)]
    strategies: Option<Vec<LayoutStrategy>>,
    #[arg(long, value_delimiter = ',')]
    workers: Option<Vec<usize>>,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, default_value_t = 1024)]
    chunk_size: usize,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Use the 10x larger point counts.
    #[arg(long)]
    full_scale: bool,
    /// Also time Lloyd clustering after seeding.
    #[arg(long)]
    lloyd: bool,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Report CSV (stdout if omitted). Environment details go to <out>.meta.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_strategy(s: &str) -> Result<LayoutStrategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Resource(_) | Error::Io(_) => EXIT_RESOURCE,
                _ => EXIT_INVALID,
            })
        }
    }
}

fn run(cli: Cli) -> pkmeans::Result<ExitCode> {
    match cli.command {
        Command::Seed { run, out } => {
            let data = load(&run)?;
            let seeded = seed(&data, &run)?;
            let centers = &seeded.centers;
            match out {
                Some(path) => pio::write_centers(&path, centers)?,
                None => pio::write_csv(io::stdout().lock(), centers.coords(), centers.dims())?,
            }
            Ok(finish(&seeded))
        }
        Command::Cluster {
            run,
            max_iter,
            tol,
            out,
        } => {
            let data = load(&run)?;
            let seeded = seed(&data, &run)?;
            let params = LloydParams { max_iter, tol };
            let result = lloyd(&data, &seeded.centers, params, &exec_config(&run))?;
            eprintln!(
                "cost {:.6} after {} iterations ({})",
                result.cost,
                result.iterations,
                if result.converged {
                    "converged"
                } else {
                    "max_iter reached"
                }
            );
            match out {
                Some(path) => pio::write_labels(&path, &result.labels)?,
                None => {
                    let mut w = BufWriter::new(io::stdout().lock());
                    for l in &result.labels {
                        writeln!(w, "{l}")?;
                    }
                    w.flush()?;
                }
            }
            Ok(finish(&seeded))
        }
        Command::Bench(args) => bench_cmd(args),
    }
}

fn finish(seeded: &SeedingResult) -> ExitCode {
    if seeded.degenerate() {
        eprintln!(
            "warning: all remaining weights were zero in rounds {:?}; used uniform fallback",
            seeded.fallback_rounds
        );
        ExitCode::from(EXIT_DEGENERATE)
    } else {
        ExitCode::SUCCESS
    }
}

fn load(run: &RunArgs) -> pkmeans::Result<Dataset> {
    match (&run.input, &run.gen) {
        (Some(path), _) => pio::read_points(path),
        (None, Some(g)) => {
            let mut rng = RngStream::new(run.rng_seed).fork(0);
            bench::generate_points(g.n, g.dims, g.blobs, g.spread, &mut rng)
        }
        (None, None) => Err(Error::InvalidRequest(
            "either --input or --gen is required".into(),
        )),
    }
}

fn exec_config(run: &RunArgs) -> ExecConfig {
    ExecConfig::default()
        .with_workers(run.workers.unwrap_or_else(available_cores))
        .with_chunk_size(run.chunk_size)
        .with_strategy(run.strategy)
        .with_seed(run.rng_seed)
}

fn seed(data: &Dataset, run: &RunArgs) -> pkmeans::Result<SeedingResult> {
    let mut rng = RngStream::new(run.rng_seed);
    match run.mode {
        Mode::Serial => pkmeans::seed_serial(data, run.k, &mut rng),
        Mode::Parallel => pkmeans::seed_parallel(data, run.k, &mut rng, &exec_config(run)),
    }
}

fn bench_cmd(args: BenchArgs) -> pkmeans::Result<ExitCode> {
    let mut spec = match args.sweep {
        SweepAxis::Clusters => ScenarioSpec::desk_clusters(),
        SweepAxis::Points => ScenarioSpec::desk_points(),
    };
    if args.full_scale {
        spec = spec.full_scale();
    }
    if let Some(fixed) = args.fixed {
        spec.fixed = fixed;
    }
    if let Some(values) = args.values {
        spec.values = values;
    }
    if let Some(strategies) = args.strategies {
        spec.strategies = strategies;
    }
    if let Some(workers) = args.workers {
        spec.workers = workers;
    }
    spec.trials = args.trials;
    spec.chunk_size = args.chunk_size;
    spec.rng_seed = args.rng_seed;
    if args.lloyd {
        spec.lloyd = Some(LloydParams {
            max_iter: args.max_iter,
            ..LloydParams::default()
        });
    }

    let report = bench::run_scenario(&spec)?;
    match &args.out {
        Some(path) => {
            report.write_csv(BufWriter::new(File::create(path)?))?;
            let mut meta = path.clone().into_os_string();
            meta.push(".meta");
            std::fs::write(&meta, report.env.to_string())?;
        }
        None => report.write_csv(io::stdout().lock())?,
    }
    match bench::summarize(&report) {
        Ok(summary) => eprint!("{summary}"),
        Err(e) => eprintln!("no summary: {e}"),
    }
    Ok(ExitCode::SUCCESS)
}
