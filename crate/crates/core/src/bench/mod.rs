//! Benchmark harness: uniform RRT* against region-guided RRT*.
//!
//! Every trial is one anytime RRT* run that stops once its best cost is
//! within `epsilon` of a per-problem reference cost `C_ref`. The run yields
//! two records: the initial stage (first goal-reaching path) and the optimal
//! stage (first path with cost at most `(1 + epsilon) * C_ref`). `C_ref` is
//! the best cost of a long uniform RRT* run on the same problem.

mod fixtures;
mod stats;

use std::path::{Path, PathBuf};
use std::time::Duration;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{load_sample, Manifest};
use crate::gridworld::load_rgb;
use crate::planner::{
    plan_rrt_star, EventKind, PlanResult, PlannerParams, PlanningProblem, Sampler, StopRule,
};
use crate::region::{decode_region, RegionMask};
use crate::seed;
use crate::{Error, Result};

pub use fixtures::{fixture_problems, write_fixtures, FixtureSpec, FIXTURES};
pub use stats::{aggregate, emit, median, quantile, AggregateStats, Metric};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerKind {
    RrtStar,
    HeuristicRrtStar,
}

impl PlannerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlannerKind::RrtStar => "rrt-star",
            PlannerKind::HeuristicRrtStar => "heuristic-rrt-star",
        }
    }
}

impl std::fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Initial,
    Optimal,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Initial => "initial",
            Stage::Optimal => "optimal",
        }
    }
}

/// Where heuristic regions come from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionSource {
    /// `<id>_region.png` next to each problem.
    GroundTruth,
    /// `PATH/<id>_region_pred.png`.
    Dir(PathBuf),
}

impl std::str::FromStr for RegionSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ground-truth" {
            Ok(RegionSource::GroundTruth)
        } else if let Some(p) = s.strip_prefix("dir:").filter(|p| !p.is_empty()) {
            Ok(RegionSource::Dir(PathBuf::from(p)))
        } else {
            Err(Error::Config(format!(
                "unknown region source {s:?}; expected ground-truth or dir:PATH"
            )))
        }
    }
}

impl std::fmt::Display for RegionSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegionSource::GroundTruth => f.write_str("ground-truth"),
            RegionSource::Dir(p) => write!(f, "dir:{}", p.display()),
        }
    }
}

/// A named planning problem with an optional heuristic region.
#[derive(Clone, Debug)]
pub struct BenchProblem {
    pub id: String,
    pub problem: PlanningProblem,
    pub region: Option<RegionMask>,
}

/// Loads every problem of a dataset-layout directory together with its
/// region from `source`.
pub fn load_problems(dir: &Path, source: &RegionSource) -> Result<Vec<BenchProblem>> {
    let manifest = Manifest::read(dir)?;
    let mut out = Vec::with_capacity(manifest.records.len());
    for r in &manifest.records {
        let sample = load_sample(dir, r)?;
        let region = match source {
            RegionSource::GroundTruth => sample.region,
            RegionSource::Dir(pred) => {
                let img = load_rgb(pred.join(format!("{}_region_pred.png", r.id)))?;
                decode_region(&img, &sample.problem.map)?
            }
        };
        out.push(BenchProblem {
            id: r.id.clone(),
            problem: sample.problem,
            region: Some(region),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub trials: usize,
    /// Planner parameters; `max_iterations` is the per-trial budget.
    pub params: PlannerParams,
    /// Iterations of the uniform RRT* run that sets `C_ref`.
    pub reference_iterations: usize,
    /// Relative tolerance above `C_ref` that ends the optimal stage.
    pub epsilon: f64,
    pub planners: Vec<PlannerKind>,
    /// Record wall-clock times. When off, every time column is zero so that
    /// repeated runs produce identical files.
    pub timing: bool,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            trials: 50,
            params: PlannerParams {
                max_iterations: 200_000,
                validate_every: None,
                ..Default::default()
            },
            reference_iterations: 200_000,
            epsilon: 0.02,
            planners: vec![PlannerKind::RrtStar, PlannerKind::HeuristicRrtStar],
            timing: true,
            seed: 0,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.planners.is_empty() {
            return Err(Error::Config("no planner selected".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::Config(format!("epsilon must be non-negative, got {}", self.epsilon)));
        }
        if self.reference_iterations == 0 {
            return Err(Error::Config("reference run needs a positive budget".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub problem: String,
    pub planner: PlannerKind,
    pub seed: u64,
    pub stage: Stage,
    pub success: bool,
    /// Path cost when the stage was reached.
    pub cost: Option<f64>,
    /// Tree size when the stage was reached, or at the end of a failed run.
    pub nodes: usize,
    pub time_ms: f64,
    /// Iterations when the stage was reached, or all iterations of a failed
    /// run.
    pub iterations: usize,
}

/// Best cost over time for one trial of one planner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub problem: String,
    pub planner: PlannerKind,
    pub seed: u64,
    /// `(t_ms, best_cost, nodes)` at every improvement.
    pub series: Vec<(f64, f64, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub problem: String,
    /// Lower bound on any path cost: distance from start to the goal disk.
    pub lower_bound: f64,
    pub c_ref: f64,
    pub target: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Comparison {
    pub references: Vec<Reference>,
    pub records: Vec<TrialRecord>,
    pub curves: Vec<Curve>,
}

fn millis(d: Duration, timing: bool) -> f64 {
    if timing {
        d.as_secs_f64() * 1e3
    } else {
        0.0
    }
}

fn stage_records(
    id: &str,
    planner: PlannerKind,
    seed: u64,
    run: &PlanResult,
    target: f64,
    timing: bool,
) -> [TrialRecord; 2] {
    let record = |stage: Stage, event: Option<&crate::planner::ProgressEvent>| match event {
        Some(e) => TrialRecord {
            problem: id.to_string(),
            planner,
            seed,
            stage,
            success: true,
            cost: Some(e.best_cost),
            nodes: e.nodes,
            time_ms: millis(e.elapsed, timing),
            iterations: e.iteration,
        },
        None => TrialRecord {
            problem: id.to_string(),
            planner,
            seed,
            stage,
            success: false,
            cost: None,
            nodes: run.tree.len(),
            time_ms: millis(run.elapsed, timing),
            iterations: run.iterations,
        },
    };
    let improving = |e: &&crate::planner::ProgressEvent| e.kind != EventKind::Final;
    let initial = run.events.iter().filter(improving).next();
    let optimal = run
        .events
        .iter()
        .filter(improving)
        .find(|e| e.best_cost <= target);
    [record(Stage::Initial, initial), record(Stage::Optimal, optimal)]
}

fn curve(id: &str, planner: PlannerKind, seed: u64, run: &PlanResult, timing: bool) -> Curve {
    Curve {
        problem: id.to_string(),
        planner,
        seed,
        series: run
            .events
            .iter()
            .filter(|e| e.kind != EventKind::Final && e.best_cost.is_finite())
            .map(|e| (millis(e.elapsed, timing), e.best_cost, e.nodes))
            .collect(),
    }
}

/// Reference cost of a problem: best cost of a uniform RRT* run with
/// `iterations` iterations.
pub fn reference_cost(
    problem: &PlanningProblem,
    params: &PlannerParams,
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    let params = PlannerParams {
        max_iterations: iterations,
        ..params.clone()
    };
    let sampler = Sampler::uniform(&problem.map, problem.goal, &params)?;
    let run = plan_rrt_star(problem, &params, &sampler, StopRule::Budget, &mut seed::rng(seed))?;
    run.best_cost().ok_or_else(|| {
        Error::Infeasible(format!(
            "reference run found no path from {} to {} in {iterations} iterations",
            problem.init, problem.goal
        ))
    })
}

/// Runs `trials` trials per problem and planner. Trial `t` of problem `p`
/// uses the same seed for every planner.
pub fn run_comparison(problems: &[BenchProblem], config: &BenchConfig) -> Result<Comparison> {
    config.validate()?;
    let heuristics = config.planners.contains(&PlannerKind::HeuristicRrtStar);
    let mut sets = Vec::with_capacity(problems.len());
    for p in problems {
        let set = match (&p.region, heuristics) {
            (_, false) => None,
            (None, true) => {
                return Err(Error::Config(format!(
                    "problem {} has no region but the heuristic planner was requested",
                    p.id
                )))
            }
            (Some(region), true) => {
                if !region.matches(&p.problem.map) {
                    return Err(Error::Config(format!(
                        "region of problem {} does not match its map size",
                        p.id
                    )));
                }
                Some(region.discretize()?)
            }
        };
        sets.push(set);
    }

    let references: Vec<Reference> = problems
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let c_ref = reference_cost(
                &p.problem,
                &config.params,
                config.reference_iterations,
                seed::derive(config.seed, &[i as u64, u64::MAX]),
            )?;
            info!("{}: reference cost {c_ref:.3}", p.id);
            Ok(Reference {
                problem: p.id.clone(),
                lower_bound: (p.problem.straight_line() - p.problem.goal_radius).max(0.0),
                c_ref,
                target: (1.0 + config.epsilon) * c_ref,
            })
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize, PlannerKind)> = (0..problems.len())
        .flat_map(|p| {
            (0..config.trials).flat_map(move |t| config.planners.iter().map(move |&k| (p, t, k)))
        })
        .collect();
    let runs: Vec<([TrialRecord; 2], Curve)> = jobs
        .par_iter()
        .map(|&(p, t, kind)| {
            let bp = &problems[p];
            let trial_seed = seed::derive(config.seed, &[p as u64, t as u64]);
            let sampler = match kind {
                PlannerKind::RrtStar => {
                    Sampler::uniform(&bp.problem.map, bp.problem.goal, &config.params)?
                }
                PlannerKind::HeuristicRrtStar => Sampler::from_params(
                    &bp.problem.map,
                    bp.problem.goal,
                    &config.params,
                    sets[p].as_ref(),
                )?,
            };
            let target = references[p].target;
            let run = plan_rrt_star(
                &bp.problem,
                &config.params,
                &sampler,
                StopRule::CostAtMost(target),
                &mut seed::rng(trial_seed),
            )?;
            Ok((
                stage_records(&bp.id, kind, trial_seed, &run, target, config.timing),
                curve(&bp.id, kind, trial_seed, &run, config.timing),
            ))
        })
        .collect::<Result<_>>()?;

    let mut out = Comparison {
        references,
        ..Default::default()
    };
    for (records, c) in runs {
        out.records.extend(records);
        out.curves.push(c);
    }
    Ok(out)
}

/// Checks record-level invariants. Returns one message per violation.
pub fn validate_records(records: &[TrialRecord], references: &[Reference]) -> Vec<String> {
    let mut violations = Vec::new();
    for r in records {
        let Some(reference) = references.iter().find(|x| x.problem == r.problem) else {
            violations.push(format!("{}: no reference", r.problem));
            continue;
        };
        if r.success {
            match r.cost {
                Some(c) if c + 1e-9 >= reference.lower_bound => {}
                c => violations.push(format!(
                    "{}/{}/{}: cost {c:?} below lower bound {}",
                    r.problem, r.planner, r.seed, reference.lower_bound
                )),
            }
            if r.nodes < 2 && reference.lower_bound > 0.0 {
                violations.push(format!("{}/{}/{}: {} node(s)", r.problem, r.planner, r.seed, r.nodes));
            }
        } else if r.cost.is_some() {
            violations.push(format!("{}/{}/{}: failed stage has a cost", r.problem, r.planner, r.seed));
        }
    }
    for init in records.iter().filter(|r| r.stage == Stage::Initial) {
        let opt = records.iter().find(|r| {
            r.stage == Stage::Optimal
                && r.problem == init.problem
                && r.planner == init.planner
                && r.seed == init.seed
        });
        match (opt, init.cost) {
            (None, _) => violations.push(format!(
                "{}/{}/{}: no optimal-stage record",
                init.problem, init.planner, init.seed
            )),
            (Some(o), Some(ci)) => {
                if let Some(co) = o.cost {
                    if co > ci + 1e-9 {
                        violations.push(format!(
                            "{}/{}/{}: optimal cost {co} above initial cost {ci}",
                            init.problem, init.planner, init.seed
                        ));
                    }
                }
            }
            (Some(o), None) => {
                if o.success {
                    violations.push(format!(
                        "{}/{}/{}: optimal stage without initial stage",
                        init.problem, init.planner, init.seed
                    ));
                }
            }
        }
    }
    violations
}
