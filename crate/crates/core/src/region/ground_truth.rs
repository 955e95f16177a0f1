use image::RgbImage;
use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::planner::{plan_rrt, Path, PlannerParams, PlanningProblem};
use crate::seed;
use crate::{Error, Result};

use super::{render_region_image, stroke_segment, RegionMask, REGION_MARKER_RADIUS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroundTruthConfig {
    pub n_runs: usize,
    /// Stroke width in pixels used to draw each solution path.
    pub stroke: f64,
    /// Parameters of each RRT run.
    pub rrt: PlannerParams,
}

impl Default for GroundTruthConfig {
    fn default() -> Self {
        GroundTruthConfig {
            n_runs: 50,
            stroke: 5.0,
            rrt: PlannerParams {
                max_iterations: 20_000,
                validate_every: None,
                ..Default::default()
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub mask: RegionMask,
    /// Green-on-white region image with black obstacles and red/blue markers.
    pub image: RgbImage,
    /// Solution paths of the runs that succeeded, in run order.
    pub paths: Vec<Path>,
    pub failed_runs: usize,
}

/// Runs RRT `n_runs` times with seeds derived from `seed` and the run index,
/// and rasterizes the union of the solution paths, clipped to free space.
/// Start and goal disks are part of the mask.
///
/// The first run doubles as the feasibility probe: if it fails the problem is
/// reported as infeasible. Later failures are only counted.
pub fn ground_truth_region(
    problem: &PlanningProblem,
    config: &GroundTruthConfig,
    seed: u64,
) -> Result<GroundTruth> {
    let map = &*problem.map;
    let mut mask = RegionMask::empty(map.width(), map.height());
    let markers = Some((problem.init, problem.goal));
    if config.n_runs == 0 {
        return Ok(GroundTruth {
            image: render_region_image(&mask, map, markers),
            mask,
            paths: Vec::new(),
            failed_runs: 0,
        });
    }

    let run = |i: usize| -> Result<Option<Path>> {
        let mut rng = seed::rng(seed::derive(seed, &[i as u64]));
        Ok(plan_rrt(problem, &config.rrt, &mut rng)?.path)
    };
    let first = run(0)?.ok_or_else(|| {
        Error::Infeasible(format!(
            "no RRT path from {} to {} within {} iterations",
            problem.init, problem.goal, config.rrt.max_iterations
        ))
    })?;
    let rest: Vec<Option<Path>> = (1..config.n_runs)
        .into_par_iter()
        .map(run)
        .collect::<Result<_>>()?;

    let mut paths = vec![first];
    let mut failed_runs = 0;
    for p in rest {
        match p {
            Some(p) => paths.push(p),
            None => failed_runs += 1,
        }
    }
    if failed_runs > 0 {
        debug!("{failed_runs} of {} ground-truth runs failed", config.n_runs);
    }

    for path in &paths {
        for w in path.states.windows(2) {
            stroke_segment(&mut mask, &w[0], &w[1], config.stroke);
        }
    }
    mask.add_disk(&problem.init, REGION_MARKER_RADIUS);
    mask.add_disk(&problem.goal, REGION_MARKER_RADIUS);
    mask.clip_to_free(map);

    Ok(GroundTruth {
        image: render_region_image(&mask, map, markers),
        mask,
        paths,
        failed_runs,
    })
}
