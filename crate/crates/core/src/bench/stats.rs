//! Aggregation and file output.

use std::collections::BTreeMap;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::table::write_csv;
use crate::{Error, Result};

use super::{Comparison, PlannerKind, Stage, TrialRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Cost,
    Nodes,
    TimeMs,
    Iterations,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Cost, Metric::Nodes, Metric::TimeMs, Metric::Iterations];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Cost => "cost",
            Metric::Nodes => "nodes",
            Metric::TimeMs => "time_ms",
            Metric::Iterations => "iterations",
        }
    }

    /// The metric's value for a record; `None` for the cost of a failed stage.
    pub fn of(&self, r: &TrialRecord) -> Option<f64> {
        match self {
            Metric::Cost => r.cost,
            Metric::Nodes => Some(r.nodes as f64),
            Metric::TimeMs => Some(r.time_ms),
            Metric::Iterations => Some(r.iterations as f64),
        }
    }
}

/// Linear-interpolation quantile of sorted data: position `p * (n - 1)`
/// between the two neighboring order statistics. Quartiles of
/// `{1, 2, 3, 4, 5}` are `(2, 3, 4)`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median of unsorted data.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub problem: String,
    pub planner: PlannerKind,
    pub stage: Stage,
    pub metric: Metric,
    /// Trials in the group, successful or not.
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    /// Successful trials the statistics are computed over.
    pub n: usize,
    pub mean: f64,
    /// Sample variance (denominator `n - 1`).
    pub variance: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AggregateStats {
    pub rows: Vec<StatRow>,
}

impl AggregateStats {
    pub fn get(&self, problem: &str, planner: PlannerKind, stage: Stage, metric: Metric) -> Option<&StatRow> {
        self.rows.iter().find(|r| {
            r.problem == problem && r.planner == planner && r.stage == stage && r.metric == metric
        })
    }
}

/// Per (problem, planner, stage, metric) statistics over successful trials.
/// Groups with fewer than two successful trials are left out with a
/// warning. The result does not depend on record order.
pub fn aggregate(records: &[TrialRecord]) -> AggregateStats {
    let mut groups: BTreeMap<(&str, PlannerKind, Stage), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.problem, r.planner, r.stage)).or_default().push(r);
    }
    let mut rows = Vec::new();
    for ((problem, planner, stage), group) in groups {
        let trials = group.len();
        let ok: Vec<&&TrialRecord> = group.iter().filter(|r| r.success).collect();
        let failures = trials - ok.len();
        if ok.len() < 2 {
            warn!(
                "{problem}/{planner}/{}: {} successful trial(s); group left out of the statistics",
                stage.as_str(),
                ok.len()
            );
            continue;
        }
        for metric in Metric::ALL {
            let mut v: Vec<f64> = ok.iter().filter_map(|r| metric.of(r)).collect();
            v.sort_by(f64::total_cmp);
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let variance = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            rows.push(StatRow {
                problem: problem.to_string(),
                planner,
                stage,
                metric,
                trials,
                failures,
                failure_rate: failures as f64 / trials as f64,
                n: v.len(),
                mean,
                variance,
                min: v[0],
                q1: quantile(&v, 0.25),
                median: quantile(&v, 0.5),
                q3: quantile(&v, 0.75),
                max: v[v.len() - 1],
            });
        }
    }
    AggregateStats { rows }
}

pub const TRIALS_HEADER: &str = "problem,planner,seed,stage,success,cost,nodes,time_ms,iterations";
pub const STATS_HEADER: &str =
    "problem,planner,stage,metric,trials,failures,failure_rate,n,mean,variance,min,q1,median,q3,max";
pub const REFERENCES_HEADER: &str = "problem,lower_bound,c_ref,target";

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `trials.csv`, `stats.csv`, `references.csv` and `curves.jsonl`.
/// Identical inputs give identical bytes.
pub fn emit(stats: &AggregateStats, comparison: &Comparison, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    write_csv(
        &out.join("trials.csv"),
        TRIALS_HEADER,
        comparison.records.iter().map(|r| {
            vec![
                r.problem.clone(),
                r.planner.to_string(),
                r.seed.to_string(),
                r.stage.as_str().to_string(),
                r.success.to_string(),
                r.cost.map(|c| c.to_string()).unwrap_or_default(),
                r.nodes.to_string(),
                r.time_ms.to_string(),
                r.iterations.to_string(),
            ]
        }),
    )?;
    write_csv(
        &out.join("stats.csv"),
        STATS_HEADER,
        stats.rows.iter().map(|s| {
            vec![
                s.problem.clone(),
                s.planner.to_string(),
                s.stage.as_str().to_string(),
                s.metric.as_str().to_string(),
                s.trials.to_string(),
                s.failures.to_string(),
                s.failure_rate.to_string(),
                s.n.to_string(),
                s.mean.to_string(),
                s.variance.to_string(),
                s.min.to_string(),
                s.q1.to_string(),
                s.median.to_string(),
                s.q3.to_string(),
                s.max.to_string(),
            ]
        }),
    )?;
    write_csv(
        &out.join("references.csv"),
        REFERENCES_HEADER,
        comparison.references.iter().map(|r| {
            vec![
                r.problem.clone(),
                r.lower_bound.to_string(),
                r.c_ref.to_string(),
                r.target.to_string(),
            ]
        }),
    )?;

    let mut curves = String::new();
    for c in &comparison.curves {
        curves.push_str(&serde_json::to_string(c)?);
        curves.push('\n');
    }
    write_file(&out.join("curves.jsonl"), &curves)
}
