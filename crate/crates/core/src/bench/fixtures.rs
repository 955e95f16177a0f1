//! The five benchmark problems, one per map family, with pinned seeds.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dataset::{render_points_image, Manifest, ManifestRecord, SampleFiles, Split, POINTS_RADIUS};
use crate::gridworld::{generate_map, save_map, save_rgb, GridMap, MapFamily, MapSpec, State};
use crate::planner::PlanningProblem;
use crate::region::{ground_truth_region, GroundTruthConfig};
use crate::seed;
use crate::{Error, Result};

use super::BenchProblem;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixtureSpec {
    pub family: MapFamily,
    pub map_seed: u64,
    /// Start and goal are the free cell centers nearest to these points.
    pub init_anchor: (f64, f64),
    pub goal_anchor: (f64, f64),
    pub goal_radius: f64,
}

const fn fixture(family: MapFamily) -> FixtureSpec {
    FixtureSpec {
        family,
        map_seed: 11,
        init_anchor: (15.0, 15.0),
        goal_anchor: (185.0, 185.0),
        goal_radius: 3.0,
    }
}

pub const FIXTURES: [FixtureSpec; 5] = [
    fixture(MapFamily::ScatteredBlocks),
    fixture(MapFamily::WallGaps),
    fixture(MapFamily::Maze),
    fixture(MapFamily::Rooms),
    fixture(MapFamily::MixedClutter),
];

/// Seed of the ground-truth regions of the fixtures.
const FIXTURE_REGION_SEED: u64 = 2024;

fn nearest_free(map: &GridMap, (ax, ay): (f64, f64)) -> Result<State> {
    let anchor = State::new(ax, ay);
    let mut best: Option<(f64, State)> = None;
    for cy in 0..map.height() {
        for cx in 0..map.width() {
            if map.is_obstacle_cell(cx, cy) {
                continue;
            }
            let s = State::cell_center(cx, cy);
            let d = s.distance(&anchor);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, s));
            }
        }
    }
    best.map(|b| b.1)
        .ok_or_else(|| Error::domain("map has no free cell"))
}

impl FixtureSpec {
    pub fn id(&self) -> String {
        format!("fixture-{}", self.family.name())
    }

    pub fn problem(&self) -> Result<PlanningProblem> {
        let map = Arc::new(generate_map(&MapSpec::new(self.family, self.map_seed))?);
        let init = nearest_free(&map, self.init_anchor)?;
        let goal = nearest_free(&map, self.goal_anchor)?;
        PlanningProblem::new(map, init, goal, self.goal_radius)
    }
}

/// The fixture problems with ground-truth regions built from `config`.
pub fn fixture_problems(config: &GroundTruthConfig) -> Result<Vec<BenchProblem>> {
    FIXTURES
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let problem = spec.problem()?;
            let gt = ground_truth_region(
                &problem,
                config,
                seed::derive(FIXTURE_REGION_SEED, &[i as u64]),
            )?;
            Ok(BenchProblem {
                id: spec.id(),
                problem,
                region: Some(gt.mask),
            })
        })
        .collect()
}

/// Writes the fixtures in dataset layout (map, points and ground-truth region
/// images plus `manifest.jsonl`) so they can be read back as a problem set.
pub fn write_fixtures(dir: &Path, config: &GroundTruthConfig) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let problems = fixture_problems(config)?;
    let mut records = Vec::new();
    for (spec, bp) in FIXTURES.iter().zip(&problems) {
        let p = &bp.problem;
        let id = spec.id();
        let files = SampleFiles::for_id(&id);
        let region = bp.region.as_ref().expect("fixtures carry regions");
        save_map(&p.map, dir.join(&files.map))?;
        save_rgb(
            &render_points_image(&p.map, &p.init, &p.goal, POINTS_RADIUS)?,
            dir.join(&files.points),
        )?;
        save_rgb(
            &crate::region::render_region_image(region, &p.map, Some((p.init, p.goal))),
            dir.join(&files.region),
        )?;
        records.push(ManifestRecord {
            id,
            split: Split::Test,
            family: spec.family,
            map_seed: spec.map_seed,
            init: p.init,
            goal: p.goal,
            goal_radius: p.goal_radius,
            n_runs: config.n_runs,
            stroke: config.stroke,
            files,
        });
    }
    let manifest = Manifest { records };
    manifest.write(dir)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{load_problems, RegionSource};
    use crate::planner::PlannerParams;

    #[test]
    fn fixtures_cover_every_family_and_are_feasible() {
        let families: Vec<_> = FIXTURES.iter().map(|f| f.family).collect();
        assert_eq!(families, MapFamily::ALL.to_vec());
        let cheap = GroundTruthConfig {
            n_runs: 2,
            ..Default::default()
        };
        for p in fixture_problems(&cheap).unwrap() {
            assert!(p.problem.straight_line() > 200.0, "{}", p.id);
            assert!(!p.region.unwrap().is_empty());
        }
    }

    #[test]
    fn written_fixtures_load_back() {
        let dir = tempfile::tempdir().unwrap();
        let cheap = GroundTruthConfig {
            n_runs: 2,
            rrt: PlannerParams {
                max_iterations: 20_000,
                validate_every: None,
                ..Default::default()
            },
            ..Default::default()
        };
        write_fixtures(dir.path(), &cheap).unwrap();
        let loaded = load_problems(dir.path(), &RegionSource::GroundTruth).unwrap();
        let direct = fixture_problems(&cheap).unwrap();
        assert_eq!(loaded.len(), 5);
        for (a, b) in loaded.iter().zip(&direct) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.problem.init, b.problem.init);
            assert_eq!(*a.problem.map, *b.problem.map);
            // Markers cover part of the start and goal disks in the image.
            let (ra, rb) = (a.region.as_ref().unwrap(), b.region.as_ref().unwrap());
            assert!(ra.count() <= rb.count() && ra.count() + 50 > rb.count());
        }
    }
}
