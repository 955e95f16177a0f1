use std::sync::Arc;

use log::warn;
use rayon::prelude::*;

use crate::gridworld::{disk_cells, GridMap};
use crate::planner::{plan_rrt, PlannerParams, PlanningProblem};
use crate::seed;
use crate::{Error, Result};

use super::RegionMask;

/// Start and goal disks added to the test free space.
pub const CONNECTIVITY_DISK_RADIUS: u32 = 2;

/// Map whose free space is the mask's member pixels plus disks of
/// [`CONNECTIVITY_DISK_RADIUS`] around the start and goal.
pub fn connectivity_map(mask: &RegionMask, problem: &PlanningProblem) -> Result<GridMap> {
    let mut cells: Vec<bool> = mask.cells().iter().map(|&m| !m).collect();
    for center in [problem.init, problem.goal] {
        for (x, y) in disk_cells(&center, CONNECTIVITY_DISK_RADIUS, mask.width(), mask.height()) {
            cells[y * mask.width() + x] = false;
        }
    }
    GridMap::from_cells(mask.width(), mask.height(), cells)
}

/// Treats the region as the only free space and reports whether RRT connects
/// the start to the goal region within `budget` iterations.
pub fn connectivity_check(
    mask: &RegionMask,
    problem: &PlanningProblem,
    budget: usize,
    seed: u64,
) -> bool {
    if !mask.matches(&problem.map) {
        warn!(
            "region is {}x{} but the map is {}x{}; counting as disconnected",
            mask.width(),
            mask.height(),
            problem.map.width(),
            problem.map.height()
        );
        return false;
    }
    let Ok(map) = connectivity_map(mask, problem) else {
        return false;
    };
    let Ok(test_problem) =
        PlanningProblem::new(Arc::new(map), problem.init, problem.goal, problem.goal_radius)
    else {
        return false;
    };
    let params = PlannerParams {
        max_iterations: budget,
        validate_every: None,
        ..Default::default()
    };
    plan_rrt(&test_problem, &params, &mut seed::rng(seed))
        .map(|r| r.success())
        .unwrap_or(false)
}

/// Fraction of `(mask, problem)` pairs that pass [`connectivity_check`].
/// Pair `i` is checked with a seed derived from `seed` and `i`.
pub fn success_rate(
    masks: &[RegionMask],
    problems: &[PlanningProblem],
    budget: usize,
    seed: u64,
) -> Result<f64> {
    if masks.is_empty() {
        return Err(Error::domain("success_rate over an empty set"));
    }
    if masks.len() != problems.len() {
        return Err(Error::domain(format!(
            "{} masks but {} problems",
            masks.len(),
            problems.len()
        )));
    }
    let passed = masks
        .par_iter()
        .zip(problems.par_iter())
        .enumerate()
        .filter(|(i, (m, p))| connectivity_check(m, p, budget, seed::derive(seed, &[*i as u64])))
        .count();
    Ok(passed as f64 / masks.len() as f64)
}
