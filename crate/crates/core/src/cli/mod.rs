//! The `regionrrt` command line.
//!
//! Every subcommand accepts `--config FILE`, a JSON object whose keys are the
//! subcommand's settings (the long flag names with `_` for `-`). Flags given on
//! the command line override the file. Each successful run writes the fully
//! resolved settings to `config.resolved.json` next to its outputs; passing
//! that file back through `--config` repeats the run.
//!
//! Exit codes: 0 on success, 1 on a domain or I/O error, 2 on a usage error.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use commands::{
    BenchSettings, EvalRegionSettings, GenDatasetSettings, GenMapsSettings, PlanSettings,
};
pub use config::RESOLVED_CONFIG_FILE;

use crate::Error;

#[derive(Debug, Parser)]
#[command(
    name = "regionrrt",
    version,
    about = "Grid-world RRT/RRT* with promising-region heuristic sampling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// JSON file supplying any setting of this subcommand.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, value_name = "N")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Log filter (error, warn, info, debug, trace).
    #[arg(long, value_name = "LEVEL")]
    #[serde(skip)]
    pub log_level: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate random maps of one family.
    GenMaps(GenMapsArgs),
    /// Generate (map, points, region) training triples and a manifest.
    GenDataset(GenDatasetArgs),
    /// Plan on one map and write the anytime trace.
    Plan(PlanArgs),
    /// Connectivity check of region images.
    EvalRegion(EvalRegionArgs),
    /// Compare uniform and heuristic RRT* on a problem set.
    Bench(BenchArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenMapsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Map family: scattered-blocks, wall-gaps, maze, rooms or mixed-clutter.
    #[arg(long, value_name = "F")]
    pub family: Option<String>,
    #[arg(long, value_name = "N")]
    pub count: Option<usize>,
    /// Obstacle density; defaults to the family's own.
    #[arg(long, value_name = "D")]
    pub density: Option<f64>,
    /// Side length in pixels.
    #[arg(long, value_name = "PX")]
    pub size: Option<usize>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GenDatasetArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Comma-separated families split into train and test.
    #[arg(long, value_delimiter = ',', value_name = "F,...")]
    pub families: Option<Vec<String>>,
    /// Comma-separated families whose samples are all tagged unseen.
    #[arg(long, value_delimiter = ',', value_name = "F,...")]
    pub unseen_families: Option<Vec<String>>,
    /// Maps per family.
    #[arg(long, value_name = "N")]
    pub maps: Option<usize>,
    #[arg(long, value_name = "N")]
    pub pairs_min: Option<usize>,
    #[arg(long, value_name = "N")]
    pub pairs_max: Option<usize>,
    /// RRT runs per ground-truth region.
    #[arg(long, value_name = "N")]
    pub runs: Option<usize>,
    /// Iteration budget of each ground-truth RRT run.
    #[arg(long, value_name = "N")]
    pub run_iters: Option<usize>,
    /// Stroke width of ground-truth paths in pixels.
    #[arg(long, value_name = "PX")]
    pub stroke: Option<f64>,
    #[arg(long, value_name = "PX")]
    pub size: Option<usize>,
    #[arg(long, value_name = "D")]
    pub density: Option<f64>,
    #[arg(long, value_name = "PX")]
    pub goal_radius: Option<f64>,
    #[arg(long, value_name = "F")]
    pub train_fraction: Option<f64>,
    /// Also write triples resized to this side under trainer<SIDE>/.
    #[arg(long, value_name = "PX")]
    pub trainer_side: Option<usize>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PlanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, value_name = "FILE")]
    pub map: Option<PathBuf>,
    #[arg(long, value_name = "X,Y")]
    pub init: Option<String>,
    #[arg(long, value_name = "X,Y")]
    pub goal: Option<String>,
    #[arg(long, value_name = "PX")]
    pub goal_radius: Option<f64>,
    /// rrt or rrt-star.
    #[arg(long, value_name = "NAME")]
    pub planner: Option<String>,
    /// Region image used as the heuristic (rrt-star only).
    #[arg(long, value_name = "FILE")]
    pub region: Option<PathBuf>,
    /// Percentage of uniform draws when a region is given.
    #[arg(long, value_name = "MU")]
    pub mu: Option<f64>,
    #[arg(long, value_name = "PX")]
    pub step: Option<f64>,
    #[arg(long, value_name = "N")]
    pub iters: Option<usize>,
    /// Stop rule for rrt-star: budget or first-path.
    #[arg(long, value_name = "RULE")]
    pub stop: Option<String>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    /// Trace CSV path; config.resolved.json goes next to it.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Write zeros instead of wall-clock times.
    #[arg(long)]
    #[serde(skip)]
    pub no_timing: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalRegionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Single mode: region image.
    #[arg(long, value_name = "FILE")]
    pub region: Option<PathBuf>,
    /// Single mode: map image.
    #[arg(long, value_name = "FILE")]
    pub map: Option<PathBuf>,
    #[arg(long, value_name = "X,Y")]
    pub init: Option<String>,
    #[arg(long, value_name = "X,Y")]
    pub goal: Option<String>,
    #[arg(long, value_name = "PX")]
    pub goal_radius: Option<f64>,
    /// Batch mode: dataset directory with manifest.jsonl.
    #[arg(long, value_name = "DIR")]
    pub data: Option<PathBuf>,
    /// Batch mode: directory of <id>_region_pred.png files.
    #[arg(long, value_name = "DIR")]
    pub pred: Option<PathBuf>,
    /// Batch mode: train, test or unseen.
    #[arg(long, value_name = "NAME")]
    pub split: Option<String>,
    /// RRT iteration budget inside the region.
    #[arg(long, value_name = "N")]
    pub budget: Option<usize>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Problem set in dataset layout.
    #[arg(long, value_name = "DIR")]
    pub problems: Option<PathBuf>,
    /// ground-truth or dir:PATH.
    #[arg(long, value_name = "SRC")]
    pub region_source: Option<String>,
    #[arg(long, value_name = "N")]
    pub trials: Option<usize>,
    /// Per-trial iteration budget.
    #[arg(long, value_name = "N")]
    pub iters: Option<usize>,
    /// Iterations of the uniform run that sets the reference cost.
    #[arg(long, value_name = "N")]
    pub reference_iters: Option<usize>,
    /// Relative tolerance above the reference cost.
    #[arg(long, value_name = "E")]
    pub epsilon: Option<f64>,
    #[arg(long, value_name = "MU")]
    pub mu: Option<f64>,
    #[arg(long, value_name = "PX")]
    pub step: Option<f64>,
    /// Comma-separated planners: rrt-star, heuristic-rrt-star.
    #[arg(long, value_delimiter = ',', value_name = "P,...")]
    pub planners: Option<Vec<String>>,
    /// Write the five built-in fixture problems (to OUT/problems unless
    /// --problems is given) and benchmark them.
    #[arg(long)]
    #[serde(skip)]
    pub fixtures: bool,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Write zeros instead of wall-clock times.
    #[arg(long)]
    #[serde(skip)]
    pub no_timing: bool,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => CliError::Usage(msg),
            other => CliError::Run(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Run(e) => write!(f, "error: {e}"),
        }
    }
}

fn init_logging(level: Option<&str>) {
    let env = env_logger::Env::default().default_filter_or(level.unwrap_or("info"));
    let mut builder = env_logger::Builder::from_env(env);
    if let Some(l) = level {
        builder.parse_filters(l);
    }
    let _ = builder
        .format(|buf, record| {
            let line = serde_json::json!({
                "level": record.level().as_str(),
                "target": record.target(),
                "message": record.args().to_string(),
            });
            writeln!(buf, "{line}")
        })
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads.filter(|&n| n > 0) {
        // Fails only if a pool already exists, e.g. in tests; keep that one.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let common = match &cli.command {
        Command::GenMaps(a) => &a.common,
        Command::GenDataset(a) => &a.common,
        Command::Plan(a) => &a.common,
        Command::EvalRegion(a) => &a.common,
        Command::Bench(a) => &a.common,
    };
    init_logging(common.log_level.as_deref());
    let result = match &cli.command {
        Command::GenMaps(a) => commands::gen_maps(a),
        Command::GenDataset(a) => commands::gen_dataset(a),
        Command::Plan(a) => commands::plan(a),
        Command::EvalRegion(a) => commands::eval_region(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("For more information, try '--help'.");
            }
            e.exit_code()
        }
    }
}
