//! RRT and RRT* over a [`GridMap`].
//!
//! Both planners draw their random targets through a [`Sampler`], which mixes
//! uniform free-space samples with samples from a heuristic set extracted from
//! a promising region. RRT stops at the first goal-reaching node; RRT* keeps
//! refining with choose-parent and rewiring and reports every improvement of
//! the best goal-reaching cost.

mod index;
mod sampler;
mod search;
mod tree;

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::gridworld::{GridMap, State};
use crate::{Error, Result};

pub use index::BucketIndex;
pub use sampler::{SampleSource, Sampler};
pub use search::{plan_rrt, plan_rrt_star, StopRule};
pub use tree::{PlanTree, TreeNode, TreeViolation};

/// Euclidean cost between two states.
pub fn cost(a: &State, b: &State) -> f64 {
    a.distance(b)
}

/// Moves from `from` toward `to` by at most `step`.
pub fn steer(from: &State, to: &State, step: f64) -> State {
    let d = from.distance(to);
    if d <= step {
        return *to;
    }
    let t = step / d;
    State::new(from.x + (to.x - from.x) * t, from.y + (to.y - from.y) * t)
}

/// Brute-force nearest node: minimal distance, ties to the lowest index.
pub fn nearest(states: &[State], query: &State) -> Result<usize> {
    states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.distance_squared(query), i))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, i)| i)
        .ok_or_else(|| Error::domain("nearest() on an empty tree"))
}

#[derive(Clone, Debug)]
pub struct PlanningProblem {
    pub map: Arc<GridMap>,
    pub init: State,
    pub goal: State,
    /// Radius of the open goal disk `{x : |x - goal| < goal_radius}`.
    pub goal_radius: f64,
}

impl PlanningProblem {
    pub fn new(map: Arc<GridMap>, init: State, goal: State, goal_radius: f64) -> Result<Self> {
        if !(goal_radius > 0.0) {
            return Err(Error::domain(format!(
                "goal radius must be positive, got {goal_radius}"
            )));
        }
        if !map.is_free(&init)? {
            return Err(Error::domain(format!("init {init} lies on an obstacle")));
        }
        if !map.is_free(&goal)? {
            return Err(Error::domain(format!("goal {goal} lies on an obstacle")));
        }
        Ok(PlanningProblem {
            map,
            init,
            goal,
            goal_radius,
        })
    }

    pub fn in_goal(&self, s: &State) -> bool {
        s.distance(&self.goal) < self.goal_radius
    }

    pub fn straight_line(&self) -> f64 {
        self.init.distance(&self.goal)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerParams {
    pub step_size: f64,
    pub max_iterations: usize,
    /// Scale of the shrinking neighbor radius. `None` means twice the map
    /// diagonal.
    pub near_radius_gamma: Option<f64>,
    /// Percentage in `[0, 100]`; a draw `u ~ U[0, 100)` takes the heuristic
    /// branch when `u > mu`.
    pub mu: f64,
    /// Goal bias, applied inside the uniform branch only.
    pub goal_sample_rate: f64,
    /// Run the tree validator every this many iterations.
    pub validate_every: Option<usize>,
    /// Keep every drawn target in the result.
    pub record_samples: bool,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            step_size: 5.0,
            max_iterations: 5000,
            near_radius_gamma: None,
            mu: 10.0,
            goal_sample_rate: 0.05,
            validate_every: if cfg!(debug_assertions) { Some(100) } else { None },
            record_samples: false,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::domain(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if !(0.0..=100.0).contains(&self.mu) {
            return Err(Error::domain(format!("mu must lie in [0, 100], got {}", self.mu)));
        }
        if !(0.0..=1.0).contains(&self.goal_sample_rate) {
            return Err(Error::domain(format!(
                "goal sample rate must lie in [0, 1], got {}",
                self.goal_sample_rate
            )));
        }
        if let Some(g) = self.near_radius_gamma {
            if !(g > 0.0) {
                return Err(Error::domain(format!("near radius gamma must be positive, got {g}")));
            }
        }
        if self.validate_every == Some(0) {
            return Err(Error::domain("validate_every must be positive"));
        }
        Ok(())
    }

    pub fn gamma_for(&self, map: &GridMap) -> f64 {
        self.near_radius_gamma.unwrap_or(2.0 * map.diagonal())
    }

    /// `min(step, gamma * sqrt(ln n / n))`.
    pub fn near_radius(&self, gamma: f64, n: usize) -> f64 {
        let n = n.max(2) as f64;
        (gamma * (n.ln() / n).sqrt()).min(self.step_size)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub states: Vec<State>,
    pub cost: f64,
}

impl Path {
    pub fn from_states(states: Vec<State>) -> Self {
        let cost = states.windows(2).map(|w| cost(&w[0], &w[1])).sum();
        Path { states, cost }
    }

    /// Checks endpoints, collision-free consecutive segments and cost
    /// additivity. Returns a description of the first violation.
    pub fn check(&self, problem: &PlanningProblem) -> std::result::Result<(), String> {
        let first = self.states.first().ok_or("empty path")?;
        let last = self.states.last().ok_or("empty path")?;
        if first != &problem.init {
            return Err(format!("path starts at {first}, not at init {}", problem.init));
        }
        if !problem.in_goal(last) {
            return Err(format!("path ends at {last}, outside the goal region"));
        }
        for w in self.states.windows(2) {
            match problem.map.segment_collision_free(&w[0], &w[1]) {
                Ok(true) => {}
                Ok(false) => return Err(format!("segment {} -> {} collides", w[0], w[1])),
                Err(e) => return Err(e.to_string()),
            }
        }
        let sum: f64 = self.states.windows(2).map(|w| cost(&w[0], &w[1])).sum();
        if (sum - self.cost).abs() > 1e-6 * sum.max(1.0) {
            return Err(format!("stored cost {} differs from segment sum {sum}", self.cost));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Initial,
    Improve,
    Final,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Initial => "initial",
            EventKind::Improve => "improve",
            EventKind::Final => "final",
        }
    }
}

/// One point of the anytime trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgressEvent {
    pub iteration: usize,
    pub nodes: usize,
    pub elapsed: Duration,
    /// `f64::INFINITY` when no path has been found yet (only on `Final`).
    pub best_cost: f64,
    pub kind: EventKind,
}

#[derive(Clone, Debug)]
pub struct PlanResult {
    pub tree: PlanTree,
    /// Best goal-reaching path, if any.
    pub path: Option<Path>,
    /// Initial, improvement and final events in iteration order.
    pub events: Vec<ProgressEvent>,
    pub iterations: usize,
    pub elapsed: Duration,
    /// How many targets came from each branch of the sampler.
    pub sample_counts: SampleCounts,
    pub samples: Option<Vec<State>>,
}

impl PlanResult {
    pub fn success(&self) -> bool {
        self.path.is_some()
    }

    pub fn best_cost(&self) -> Option<f64> {
        self.path.as_ref().map(|p| p.cost)
    }

    pub fn initial_event(&self) -> Option<&ProgressEvent> {
        self.events.iter().find(|e| e.kind == EventKind::Initial)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub uniform: usize,
    pub goal: usize,
    pub heuristic: usize,
}

impl SampleCounts {
    pub fn record(&mut self, source: SampleSource) {
        match source {
            SampleSource::Uniform => self.uniform += 1,
            SampleSource::Goal => self.goal += 1,
            SampleSource::Heuristic => self.heuristic += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.uniform + self.goal + self.heuristic
    }
}
