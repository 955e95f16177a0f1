use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gridworld::State;
use crate::Result;

use super::{
    cost, steer, BucketIndex, EventKind, PlanResult, PlanTree, PlannerParams, PlanningProblem,
    ProgressEvent, SampleCounts, Sampler,
};

/// When an RRT* run may stop before its iteration budget is spent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "value")]
pub enum StopRule {
    /// Always use the full budget.
    #[default]
    Budget,
    /// Stop at the first goal-reaching node.
    FirstPath,
    /// Stop as soon as the best cost is at most the given value.
    CostAtMost(f64),
}

impl StopRule {
    fn satisfied(&self, best: Option<f64>) -> bool {
        match (self, best) {
            (StopRule::Budget, _) | (_, None) => false,
            (StopRule::FirstPath, Some(_)) => true,
            (StopRule::CostAtMost(limit), Some(c)) => c <= *limit,
        }
    }
}

/// Plain RRT with a goal-biased uniform sampler. Stops at the first node that
/// lands in the goal region, or fails once `max_iterations` is exhausted.
pub fn plan_rrt<R: Rng + ?Sized>(
    problem: &PlanningProblem,
    params: &PlannerParams,
    rng: &mut R,
) -> Result<PlanResult> {
    params.validate()?;
    let sampler = Sampler::uniform(&problem.map, problem.goal, params)?;
    Ok(grow(problem, params, &sampler, rng, Variant::Rrt, StopRule::FirstPath))
}

/// RRT* with choose-parent and rewiring over the neighbor radius
/// `min(step, gamma * sqrt(ln n / n))`.
pub fn plan_rrt_star<R: Rng + ?Sized>(
    problem: &PlanningProblem,
    params: &PlannerParams,
    sampler: &Sampler,
    stop: StopRule,
    rng: &mut R,
) -> Result<PlanResult> {
    params.validate()?;
    Ok(grow(problem, params, sampler, rng, Variant::RrtStar, stop))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Variant {
    Rrt,
    RrtStar,
}

struct Best {
    cost: f64,
    node: usize,
}

fn best_goal_node(tree: &PlanTree, goal_nodes: &[usize]) -> Option<Best> {
    goal_nodes
        .iter()
        .map(|&i| (tree.node(i).cost, i))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(cost, node)| Best { cost, node })
}

fn grow<R: Rng + ?Sized>(
    problem: &PlanningProblem,
    params: &PlannerParams,
    sampler: &Sampler,
    rng: &mut R,
    variant: Variant,
    stop: StopRule,
) -> PlanResult {
    let started = Instant::now();
    let map = &*problem.map;
    let gamma = params.gamma_for(map);
    let mut tree = PlanTree::with_root(problem.init);
    let mut states: Vec<State> = vec![problem.init];
    let mut index = BucketIndex::new(
        map.width() as f64,
        map.height() as f64,
        params.step_size.max(1.0),
    );
    index.insert(0, &problem.init);

    let mut goal_nodes = Vec::new();
    let mut best: Option<Best> = None;
    let mut events = Vec::new();
    let mut counts = SampleCounts::default();
    let mut samples = params.record_samples.then(Vec::new);
    let mut near = Vec::new();
    let mut candidates: Vec<(f64, usize)> = Vec::new();

    if problem.in_goal(&problem.init) {
        goal_nodes.push(0);
        best = Some(Best { cost: 0.0, node: 0 });
        events.push(ProgressEvent {
            iteration: 0,
            nodes: 1,
            elapsed: started.elapsed(),
            best_cost: 0.0,
            kind: EventKind::Initial,
        });
    }

    let mut iterations = 0;
    while iterations < params.max_iterations && !stop.satisfied(best.as_ref().map(|b| b.cost)) {
        iterations += 1;
        let (target, source) = sampler.draw(rng);
        counts.record(source);
        if let Some(s) = samples.as_mut() {
            s.push(target);
        }

        let nearest = index
            .nearest(&states, &target)
            .expect("tree always holds the root");
        let from = states[nearest];
        let new_state = steer(&from, &target, params.step_size);
        // Heuristic draws may fall on obstacles; the edge check rejects them.
        if !map.segment_free_in_bounds(&from, &new_state) {
            continue;
        }

        let new_node = match variant {
            Variant::Rrt => tree.push(new_state, nearest),
            Variant::RrtStar => {
                let radius = params.near_radius(gamma, tree.len() + 1);
                index.within(&states, &new_state, radius, &mut near);
                candidates.clear();
                candidates.extend(
                    near.iter()
                        .chain(std::iter::once(&nearest))
                        .map(|&i| (tree.node(i).cost + cost(&states[i], &new_state), i)),
                );
                candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                candidates.dedup_by_key(|c| c.1);
                // The nearest node is known to connect, so this always succeeds.
                let parent = candidates
                    .iter()
                    .find(|&&(_, i)| {
                        i == nearest || map.segment_free_in_bounds(&states[i], &new_state)
                    })
                    .map(|&(_, i)| i)
                    .expect("nearest node is a collision-free candidate");
                tree.push(new_state, parent)
            }
        };
        states.push(new_state);
        index.insert(new_node, &new_state);

        let mut rewired = false;
        if variant == Variant::RrtStar {
            let parent = tree.node(new_node).parent;
            let new_cost = tree.node(new_node).cost;
            for &j in &near {
                if Some(j) == parent {
                    continue;
                }
                let via_new = new_cost + cost(&new_state, &states[j]);
                if via_new < tree.node(j).cost - 1e-9
                    && map.segment_free_in_bounds(&new_state, &states[j])
                {
                    tree.reparent(j, new_node);
                    rewired = true;
                }
            }
        }

        let reached_goal = problem.in_goal(&new_state);
        if reached_goal {
            goal_nodes.push(new_node);
        }
        if reached_goal || rewired {
            let previous = best.as_ref().map(|b| b.cost);
            best = best_goal_node(&tree, &goal_nodes);
            if let Some(b) = &best {
                let improved = previous.map_or(true, |p| b.cost < p - 1e-12);
                if improved {
                    events.push(ProgressEvent {
                        iteration: iterations,
                        nodes: tree.len(),
                        elapsed: started.elapsed(),
                        best_cost: b.cost,
                        kind: if previous.is_none() {
                            EventKind::Initial
                        } else {
                            EventKind::Improve
                        },
                    });
                }
            }
        }

        if let Some(every) = params.validate_every {
            if iterations % every == 0 {
                if let Err(v) = tree.validate(map) {
                    panic!("tree invariant violated at iteration {iterations}: {v}");
                }
            }
        }
    }

    let elapsed = started.elapsed();
    events.push(ProgressEvent {
        iteration: iterations,
        nodes: tree.len(),
        elapsed,
        best_cost: best.as_ref().map_or(f64::INFINITY, |b| b.cost),
        kind: EventKind::Final,
    });
    let path = best.map(|b| tree.path_to(b.node));
    PlanResult {
        tree,
        path,
        events,
        iterations,
        elapsed,
        sample_counts: counts,
        samples,
    }
}
