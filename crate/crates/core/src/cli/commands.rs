use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bench::{
    aggregate, emit, load_problems, run_comparison, validate_records, write_fixtures, BenchConfig,
    PlannerKind, RegionSource,
};
use crate::dataset::{generate_dataset, load_sample, DatasetConfig, Manifest, Split};
use crate::gridworld::{
    generate_map, load_map, load_rgb, save_map, MapFamily, MapSpec, State, DEFAULT_MAP_SIDE,
};
use crate::planner::{plan_rrt, plan_rrt_star, PlannerParams, PlanningProblem, Sampler, StopRule};
use crate::region::{connectivity_check, decode_region, GroundTruthConfig};
use crate::table::write_csv;
use crate::{seed, Error};

use super::config::{required, resolve, write_resolved};
use super::{
    init_threads, BenchArgs, CliError, EvalRegionArgs, GenDatasetArgs, GenMapsArgs, PlanArgs,
};

type CliResult<T = ()> = Result<T, CliError>;

fn create_dir(dir: &Path) -> CliResult {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Run(Error::io(dir, e)))
}

fn write_text(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| CliError::Run(Error::io(path, e)))
}

fn parse_state(text: &str, flag: &str) -> CliResult<State> {
    text.parse()
        .map_err(|e| CliError::Usage(format!("{flag} {text:?}: {e}")))
}

fn no_timing(flag: bool) -> Vec<(&'static str, Value)> {
    if flag {
        vec![("timing", Value::Bool(false))]
    } else {
        Vec::new()
    }
}

fn json_line(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- gen-maps

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenMapsSettings {
    pub threads: Option<usize>,
    pub family: Option<MapFamily>,
    pub count: usize,
    pub density: Option<f64>,
    pub size: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for GenMapsSettings {
    fn default() -> Self {
        GenMapsSettings {
            threads: None,
            family: None,
            count: 1,
            density: None,
            size: DEFAULT_MAP_SIDE,
            seed: 0,
            out: None,
        }
    }
}

/// Writes `<family>-<i>.png` for `i < count` plus `maps.jsonl` describing
/// each map. Map `i` uses a seed derived from `seed` and `i`.
pub(super) fn gen_maps(args: &GenMapsArgs) -> CliResult {
    let s: GenMapsSettings = resolve("gen-maps", args.common.config.as_deref(), args, &[])?;
    let family = required(&s.family, "--family")?;
    let out = required(&s.out, "--out")?;
    init_threads(s.threads);
    create_dir(&out)?;
    let maps = (0..s.count)
        .into_par_iter()
        .map(|i| {
            let mut spec = MapSpec::new(family, seed::derive(s.seed, &[i as u64]))
                .with_size(s.size, s.size);
            if let Some(d) = s.density {
                spec = spec.with_density(d);
            }
            generate_map(&spec).map(|m| (spec, m))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let mut index = String::new();
    for (i, (spec, map)) in maps.iter().enumerate() {
        let file = format!("{}-{i:03}.png", family.name());
        save_map(map, out.join(&file))?;
        let row = json!({
            "file": file,
            "family": family,
            "seed": spec.seed,
            "width": map.width(),
            "height": map.height(),
            "density": spec.density,
            "free_fraction": map.free_fraction(),
        });
        index.push_str(&row.to_string());
        index.push('\n');
    }
    write_text(&out.join("maps.jsonl"), &index)?;
    write_resolved(&out, "gen-maps", &s)?;
    info!("wrote {} {} map(s) to {}", s.count, family, out.display());
    Ok(())
}

// ------------------------------------------------------------- gen-dataset

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenDatasetSettings {
    pub threads: Option<usize>,
    pub families: Vec<MapFamily>,
    pub unseen_families: Vec<MapFamily>,
    pub maps: usize,
    pub pairs_min: usize,
    pub pairs_max: usize,
    pub runs: usize,
    pub run_iters: usize,
    pub stroke: f64,
    pub size: usize,
    pub density: Option<f64>,
    pub goal_radius: f64,
    pub train_fraction: f64,
    pub trainer_side: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for GenDatasetSettings {
    fn default() -> Self {
        let d = DatasetConfig::default();
        GenDatasetSettings {
            threads: None,
            families: d.families,
            unseen_families: d.unseen_families,
            maps: d.maps_per_family,
            pairs_min: d.pairs_min,
            pairs_max: d.pairs_max,
            runs: d.ground_truth.n_runs,
            run_iters: d.ground_truth.rrt.max_iterations,
            stroke: d.ground_truth.stroke,
            size: d.map_size,
            density: d.density,
            goal_radius: d.goal_radius,
            train_fraction: d.train_fraction,
            trainer_side: d.trainer_side,
            seed: d.seed,
            out: None,
        }
    }
}

impl GenDatasetSettings {
    fn dataset_config(&self) -> DatasetConfig {
        let base = DatasetConfig::default();
        DatasetConfig {
            families: self.families.clone(),
            unseen_families: self.unseen_families.clone(),
            maps_per_family: self.maps,
            pairs_min: self.pairs_min,
            pairs_max: self.pairs_max,
            map_size: self.size,
            density: self.density,
            goal_radius: self.goal_radius,
            min_separation: None,
            ground_truth: GroundTruthConfig {
                n_runs: self.runs,
                stroke: self.stroke,
                rrt: PlannerParams {
                    max_iterations: self.run_iters,
                    ..base.ground_truth.rrt
                },
            },
            train_fraction: self.train_fraction,
            trainer_side: self.trainer_side,
            seed: self.seed,
        }
    }
}

pub(super) fn gen_dataset(args: &GenDatasetArgs) -> CliResult {
    let s: GenDatasetSettings = resolve("gen-dataset", args.common.config.as_deref(), args, &[])?;
    let out = required(&s.out, "--out")?;
    init_threads(s.threads);
    let cfg = s.dataset_config();
    cfg.validate()?;
    let result = generate_dataset(&cfg, &out)?;
    write_resolved(&out, "gen-dataset", &s)?;
    let c = result.manifest.counts();
    info!(
        "wrote {} samples (train {}, test {}, unseen {}), skipped {}",
        c.total(),
        c.train,
        c.test,
        c.unseen,
        result.skipped.len()
    );
    Ok(())
}

// -------------------------------------------------------------------- plan

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanPlanner {
    Rrt,
    RrtStar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanStop {
    Budget,
    FirstPath,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSettings {
    pub threads: Option<usize>,
    pub map: Option<PathBuf>,
    pub init: Option<String>,
    pub goal: Option<String>,
    pub goal_radius: f64,
    pub planner: PlanPlanner,
    pub region: Option<PathBuf>,
    pub mu: f64,
    pub step: f64,
    pub iters: usize,
    pub stop: PlanStop,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub timing: bool,
}

impl Default for PlanSettings {
    fn default() -> Self {
        let p = PlannerParams::default();
        PlanSettings {
            threads: None,
            map: None,
            init: None,
            goal: None,
            goal_radius: 3.0,
            planner: PlanPlanner::RrtStar,
            region: None,
            mu: p.mu,
            step: p.step_size,
            iters: p.max_iterations,
            stop: PlanStop::Budget,
            seed: 0,
            out: None,
            timing: true,
        }
    }
}

pub const TRACE_HEADER: &str = "iteration,elapsed_ms,nodes,best_cost,event";

pub(super) fn plan(args: &PlanArgs) -> CliResult {
    let s: PlanSettings = resolve(
        "plan",
        args.common.config.as_deref(),
        args,
        &no_timing(args.no_timing),
    )?;
    let map_path = required(&s.map, "--map")?;
    let init = parse_state(&required(&s.init, "--init")?, "--init")?;
    let goal = parse_state(&required(&s.goal, "--goal")?, "--goal")?;
    let out = required(&s.out, "--out")?;
    init_threads(s.threads);
    if s.region.is_some() && s.planner == PlanPlanner::Rrt {
        return Err(CliError::Usage("--region needs --planner rrt-star".into()));
    }

    let map = Arc::new(load_map(&map_path)?);
    let problem = PlanningProblem::new(map.clone(), init, goal, s.goal_radius)?;
    let params = PlannerParams {
        step_size: s.step,
        max_iterations: s.iters,
        mu: s.mu,
        ..Default::default()
    };
    let mut rng = seed::rng(s.seed);
    let result = match s.planner {
        PlanPlanner::Rrt => plan_rrt(&problem, &params, &mut rng)?,
        PlanPlanner::RrtStar => {
            let heuristic = match &s.region {
                Some(path) => Some(decode_region(&load_rgb(path)?, &map)?.discretize()?),
                None => None,
            };
            let sampler = Sampler::from_params(&map, goal, &params, heuristic.as_ref())?;
            let stop = match s.stop {
                PlanStop::Budget => StopRule::Budget,
                PlanStop::FirstPath => StopRule::FirstPath,
            };
            plan_rrt_star(&problem, &params, &sampler, stop, &mut rng)?
        }
    };

    let dir = out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    create_dir(&dir)?;
    let rows = result.events.iter().map(|e| {
        let ms = if s.timing { e.elapsed.as_secs_f64() * 1e3 } else { 0.0 };
        vec![
            e.iteration.to_string(),
            ms.to_string(),
            e.nodes.to_string(),
            e.best_cost.to_string(),
            e.kind.as_str().to_string(),
        ]
    });
    write_csv(&out, TRACE_HEADER, rows)?;
    write_resolved(&dir, "plan", &s)?;
    let summary = json!({
        "success": result.success(),
        "cost": result.best_cost(),
        "iterations": result.iterations,
        "nodes": result.tree.len(),
    });
    println!("{summary}");
    Ok(())
}

// ------------------------------------------------------------- eval-region

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalRegionSettings {
    pub threads: Option<usize>,
    pub region: Option<PathBuf>,
    pub map: Option<PathBuf>,
    pub init: Option<String>,
    pub goal: Option<String>,
    pub goal_radius: f64,
    pub data: Option<PathBuf>,
    pub pred: Option<PathBuf>,
    pub split: Split,
    pub budget: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for EvalRegionSettings {
    fn default() -> Self {
        EvalRegionSettings {
            threads: None,
            region: None,
            map: None,
            init: None,
            goal: None,
            goal_radius: 3.0,
            data: None,
            pred: None,
            split: Split::Test,
            budget: 5000,
            seed: 0,
            out: PathBuf::from("."),
        }
    }
}

/// Single mode checks one region image; batch mode (`--data`, `--pred`)
/// checks `<id>_region_pred.png` for every sample of one split.
pub(super) fn eval_region(args: &EvalRegionArgs) -> CliResult {
    let s: EvalRegionSettings = resolve("eval-region", args.common.config.as_deref(), args, &[])?;
    init_threads(s.threads);
    let report = match (&s.data, &s.region) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "--data (batch mode) and --region (single mode) are mutually exclusive".into(),
            ))
        }
        (Some(data), None) => {
            let pred = required(&s.pred, "--pred")?;
            eval_batch(&s, data, &pred)?
        }
        (None, _) => {
            let region = required(&s.region, "--region")?;
            let map_path = required(&s.map, "--map")?;
            let init = parse_state(&required(&s.init, "--init")?, "--init")?;
            let goal = parse_state(&required(&s.goal, "--goal")?, "--goal")?;
            let map = Arc::new(load_map(&map_path)?);
            let problem = PlanningProblem::new(map.clone(), init, goal, s.goal_radius)?;
            let mask = decode_region(&load_rgb(&region)?, &map)?;
            let connected = connectivity_check(&mask, &problem, s.budget, s.seed);
            json!({ "region": region, "members": mask.count(), "connected": connected })
        }
    };
    create_dir(&s.out)?;
    write_text(&s.out.join("eval.json"), &json_line(&report))?;
    write_resolved(&s.out, "eval-region", &s)?;
    println!("{report}");
    Ok(())
}

fn eval_batch(s: &EvalRegionSettings, data: &Path, pred: &Path) -> CliResult<Value> {
    let manifest = Manifest::read(data)?;
    let records: Vec<_> = manifest.with_split(s.split).cloned().collect();
    if records.is_empty() {
        return Err(CliError::Run(Error::Domain(format!(
            "no {} samples in {}",
            s.split.as_str(),
            data.display()
        ))));
    }
    let results = records
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let sample = load_sample(data, r)?;
            let img = load_rgb(pred.join(format!("{}_region_pred.png", r.id)))?;
            let mask = decode_region(&img, &sample.problem.map)?;
            let ok = connectivity_check(&mask, &sample.problem, s.budget, seed::derive(s.seed, &[i as u64]));
            Ok((r.id.clone(), mask.count(), ok))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    create_dir(&s.out)?;
    write_csv(
        &s.out.join("eval.csv"),
        "id,members,connected",
        results
            .iter()
            .map(|(id, members, ok)| vec![id.clone(), members.to_string(), ok.to_string()]),
    )?;
    let connected = results.iter().filter(|r| r.2).count();
    Ok(json!({
        "split": s.split,
        "samples": results.len(),
        "connected": connected,
        "success_rate": connected as f64 / results.len() as f64,
    }))
}

// ------------------------------------------------------------------- bench

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSettings {
    pub threads: Option<usize>,
    pub problems: Option<PathBuf>,
    pub fixtures: bool,
    pub region_source: String,
    pub trials: usize,
    pub iters: usize,
    pub reference_iters: usize,
    pub epsilon: f64,
    pub mu: f64,
    pub step: f64,
    pub planners: Vec<PlannerKind>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub timing: bool,
}

impl Default for BenchSettings {
    fn default() -> Self {
        let b = BenchConfig::default();
        BenchSettings {
            threads: None,
            problems: None,
            fixtures: false,
            region_source: RegionSource::GroundTruth.to_string(),
            trials: b.trials,
            iters: b.params.max_iterations,
            reference_iters: b.reference_iterations,
            epsilon: b.epsilon,
            mu: b.params.mu,
            step: b.params.step_size,
            planners: b.planners,
            seed: b.seed,
            out: None,
            timing: b.timing,
        }
    }
}

pub(super) fn bench(args: &BenchArgs) -> CliResult {
    let mut extra = no_timing(args.no_timing);
    if args.fixtures {
        extra.push(("fixtures", Value::Bool(true)));
    }
    let s: BenchSettings = resolve("bench", args.common.config.as_deref(), args, &extra)?;
    let out = required(&s.out, "--out")?;
    let source: RegionSource = s.region_source.parse()?;
    init_threads(s.threads);
    create_dir(&out)?;
    let problems_dir = match (&s.problems, s.fixtures) {
        (Some(p), false) => p.clone(),
        (p, true) => {
            let dir = p.clone().unwrap_or_else(|| out.join("problems"));
            write_fixtures(&dir, &GroundTruthConfig::default())?;
            dir
        }
        (None, false) => {
            return Err(CliError::Usage(
                "the following required argument was not provided: --problems (or --fixtures)"
                    .into(),
            ))
        }
    };
    let mut problems = load_problems(&problems_dir, &source)?;
    if !s.planners.contains(&PlannerKind::HeuristicRrtStar) {
        problems.iter_mut().for_each(|p| p.region = None);
    }
    let base = BenchConfig::default();
    let config = BenchConfig {
        trials: s.trials,
        params: PlannerParams {
            step_size: s.step,
            max_iterations: s.iters,
            mu: s.mu,
            ..base.params
        },
        reference_iterations: s.reference_iters,
        epsilon: s.epsilon,
        planners: s.planners.clone(),
        timing: s.timing,
        seed: s.seed,
    };
    let comparison = run_comparison(&problems, &config)?;
    let violations = validate_records(&comparison.records, &comparison.references);
    if !violations.is_empty() {
        return Err(CliError::Run(Error::Domain(format!(
            "trial records violate invariants: {}",
            violations.join("; ")
        ))));
    }
    emit(&aggregate(&comparison.records), &comparison, &out)?;
    write_resolved(&out, "bench", &s)?;
    info!(
        "{} records for {} problem(s) written to {}",
        comparison.records.len(),
        problems.len(),
        out.display()
    );
    Ok(())
}
