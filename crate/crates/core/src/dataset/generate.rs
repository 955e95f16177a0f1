use std::path::Path;
use std::sync::Arc;

use image::RgbImage;
use log::{info, warn};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gridworld::{generate_map, save_map, save_rgb, GridMap, MapFamily, MapSpec, State};
use crate::planner::PlanningProblem;
use crate::region::{ground_truth_region, GroundTruthConfig, RegionMask};
use crate::seed;
use crate::{Error, Result};

use super::render::{render_points_image, resize_for_trainer, POINTS_RADIUS};
use super::{split, Manifest, ManifestRecord, SampleFiles, Split};

/// Attempts at finding a start/goal pair far enough apart on one map.
const PAIR_ATTEMPTS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// Families whose maps are split into train and test.
    pub families: Vec<MapFamily>,
    /// Families whose samples are all tagged `unseen`.
    pub unseen_families: Vec<MapFamily>,
    pub maps_per_family: usize,
    pub pairs_min: usize,
    pub pairs_max: usize,
    pub map_size: usize,
    /// Obstacle density override; `None` uses each family's default.
    pub density: Option<f64>,
    pub goal_radius: f64,
    /// Minimum start-goal distance; `None` means a fifth of the map side.
    pub min_separation: Option<f64>,
    pub ground_truth: GroundTruthConfig,
    pub train_fraction: f64,
    /// Also write triples resized to this side under `trainer<side>/`.
    pub trainer_side: Option<usize>,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            families: MapFamily::ALL.to_vec(),
            unseen_families: Vec::new(),
            maps_per_family: 10,
            pairs_min: 20,
            pairs_max: 50,
            map_size: crate::gridworld::DEFAULT_MAP_SIDE,
            density: None,
            goal_radius: 3.0,
            min_separation: None,
            ground_truth: GroundTruthConfig::default(),
            train_fraction: 0.8,
            trainer_side: None,
            seed: 0,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() && self.unseen_families.is_empty() {
            return Err(Error::Config("no map families selected".into()));
        }
        if let Some(f) = self.families.iter().find(|f| self.unseen_families.contains(f)) {
            return Err(Error::Config(format!("family {f} is both seen and unseen")));
        }
        if self.maps_per_family == 0 {
            return Err(Error::Config("maps per family must be positive".into()));
        }
        if self.pairs_min == 0 || self.pairs_min > self.pairs_max {
            return Err(Error::Config(format!(
                "pairs range [{}, {}] must be non-empty and positive",
                self.pairs_min, self.pairs_max
            )));
        }
        if !(self.goal_radius > 0.0) {
            return Err(Error::Config("goal radius must be positive".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie strictly between 0 and 1, got {}",
                self.train_fraction
            )));
        }
        if self.ground_truth.n_runs == 0 {
            return Err(Error::Config("ground truth needs at least one run".into()));
        }
        self.ground_truth.rrt.validate()
    }

    fn min_separation(&self) -> f64 {
        self.min_separation.unwrap_or(self.map_size as f64 / 5.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedSample {
    pub id: String,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct DatasetOutput {
    pub manifest: Manifest,
    pub skipped: Vec<SkippedSample>,
}

struct Sample {
    record: ManifestRecord,
    map: Arc<GridMap>,
    points: RgbImage,
    region: RegionMask,
    region_image: RgbImage,
}

struct MapJob {
    family: MapFamily,
    map_index: usize,
    map_seed: u64,
    unseen: bool,
}

fn family_code(f: MapFamily) -> u64 {
    MapFamily::ALL.iter().position(|&g| g == f).unwrap() as u64
}

fn pick_pair(map: &GridMap, min_sep: f64, rng: &mut impl Rng) -> Option<(State, State)> {
    let free = map.free_cell_indices();
    if free.len() < 2 {
        return None;
    }
    let center = |i: u32| State::cell_center(i as usize % map.width(), i as usize / map.width());
    (0..PAIR_ATTEMPTS).find_map(|_| {
        let a = center(free[rng.gen_range(0..free.len())]);
        let b = center(free[rng.gen_range(0..free.len())]);
        (a.distance(&b) >= min_sep).then_some((a, b))
    })
}

fn build_sample(
    config: &DatasetConfig,
    job: &MapJob,
    map: &Arc<GridMap>,
    pair: usize,
) -> std::result::Result<Sample, SkippedSample> {
    let id = format!("{}-{:03}-{:02}", job.family.name(), job.map_index, pair);
    let skip = |reason: String| SkippedSample {
        id: id.clone(),
        reason,
    };
    let mut rng = seed::rng(seed::derive(job.map_seed, &[1, pair as u64]));
    let (init, goal) = pick_pair(map, config.min_separation(), &mut rng)
        .ok_or_else(|| skip("no start/goal pair far enough apart".into()))?;
    let problem = PlanningProblem::new(map.clone(), init, goal, config.goal_radius)
        .map_err(|e| skip(e.to_string()))?;
    let gt = ground_truth_region(
        &problem,
        &config.ground_truth,
        seed::derive(job.map_seed, &[2, pair as u64]),
    )
    .map_err(|e| skip(e.to_string()))?;
    let points =
        render_points_image(map, &init, &goal, POINTS_RADIUS).map_err(|e| skip(e.to_string()))?;
    Ok(Sample {
        record: ManifestRecord {
            files: SampleFiles::for_id(&id),
            id,
            split: if job.unseen { Split::Unseen } else { Split::Train },
            family: job.family,
            map_seed: job.map_seed,
            init,
            goal,
            goal_radius: config.goal_radius,
            n_runs: config.ground_truth.n_runs,
            stroke: config.ground_truth.stroke,
        },
        map: map.clone(),
        points,
        region: gt.mask,
        region_image: gt.image,
    })
}

fn write_sample(out: &Path, sample: &Sample, trainer_side: Option<usize>) -> Result<()> {
    let files = &sample.record.files;
    save_map(&sample.map, out.join(&files.map))?;
    save_rgb(&sample.points, out.join(&files.points))?;
    save_rgb(&sample.region_image, out.join(&files.region))?;
    if let Some(side) = trainer_side {
        let dir = out.join(format!("trainer{side}"));
        let small = resize_for_trainer(
            &sample.map,
            &sample.region,
            &sample.record.init,
            &sample.record.goal,
            side,
        )?;
        save_rgb(&small.map_image, dir.join(&files.map))?;
        save_rgb(&small.points_image, dir.join(&files.points))?;
        save_rgb(&small.region_image, dir.join(&files.region))?;
    }
    Ok(())
}

/// Generates maps, start/goal pairs and ground-truth regions, writes every
/// triple and the manifest to `out`, and tags samples by a map-grouped split.
///
/// Samples are built in parallel from seeds derived from `config.seed`, the
/// family, the map index and the pair index, so the output does not depend on
/// scheduling. Pairs whose ground truth cannot be built are skipped, logged,
/// and listed in `skipped.jsonl`.
pub fn generate_dataset(config: &DatasetConfig, out: &Path) -> Result<DatasetOutput> {
    config.validate()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    if let Some(side) = config.trainer_side {
        let dir = out.join(format!("trainer{side}"));
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }

    let jobs: Vec<MapJob> = config
        .families
        .iter()
        .map(|&f| (f, false))
        .chain(config.unseen_families.iter().map(|&f| (f, true)))
        .flat_map(|(family, unseen)| {
            (0..config.maps_per_family).map(move |map_index| MapJob {
                family,
                map_index,
                map_seed: seed::derive(config.seed, &[family_code(family), map_index as u64]),
                unseen,
            })
        })
        .collect();

    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for job in &jobs {
        let mut spec = MapSpec::new(job.family, job.map_seed)
            .with_size(config.map_size, config.map_size);
        if let Some(d) = config.density {
            spec = spec.with_density(d);
        }
        let map = match generate_map(&spec) {
            Ok(m) => Arc::new(m),
            Err(e) => {
                warn!("skipping map {}-{:03}: {e}", job.family, job.map_index);
                skipped.push(SkippedSample {
                    id: format!("{}-{:03}", job.family.name(), job.map_index),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let n_pairs = seed::rng(seed::derive(job.map_seed, &[0]))
            .gen_range(config.pairs_min..=config.pairs_max);
        let built: Vec<_> = (0..n_pairs)
            .into_par_iter()
            .map(|p| build_sample(config, job, &map, p))
            .collect();
        for b in built {
            match b {
                Ok(s) => {
                    write_sample(out, &s, config.trainer_side)?;
                    samples.push(s.record);
                }
                Err(s) => {
                    warn!("skipping sample {}: {}", s.id, s.reason);
                    skipped.push(s);
                }
            }
        }
        info!(
            "map {}-{:03}: {} samples so far",
            job.family, job.map_index,
            samples.len()
        );
    }

    let mut manifest = Manifest { records: samples };
    let seen_maps = jobs.iter().filter(|j| !j.unseen).count();
    if seen_maps >= 2 {
        manifest = split(&manifest, config.train_fraction, seed::derive(config.seed, &[u64::MAX]))?;
    } else {
        warn!("only {seen_maps} seen map(s); every seen sample is tagged train");
    }
    manifest.write(out)?;
    write_skipped(out, &skipped)?;
    Ok(DatasetOutput { manifest, skipped })
}

fn write_skipped(out: &Path, skipped: &[SkippedSample]) -> Result<()> {
    let path = out.join("skipped.jsonl");
    let mut text = String::new();
    for s in skipped {
        text.push_str(&serde_json::to_string(s)?);
        text.push('\n');
    }
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::validate_dataset;
    use crate::planner::PlannerParams;

    pub(crate) fn small_config(seed: u64) -> DatasetConfig {
        DatasetConfig {
            families: vec![MapFamily::ScatteredBlocks],
            maps_per_family: 2,
            pairs_min: 3,
            pairs_max: 3,
            map_size: 64,
            ground_truth: GroundTruthConfig {
                n_runs: 8,
                stroke: 5.0,
                rrt: PlannerParams {
                    max_iterations: 5000,
                    validate_every: None,
                    ..Default::default()
                },
            },
            trainer_side: Some(32),
            seed,
            ..Default::default()
        }
    }

    fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut out = Vec::new();
        for e in walk(dir) {
            let rel = e.strip_prefix(dir).unwrap().display().to_string();
            out.push((rel, std::fs::read(&e).unwrap()));
        }
        out.sort();
        out
    }

    fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
        let mut files = Vec::new();
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                files.extend(walk(&p));
            } else {
                files.push(p);
            }
        }
        files
    }

    #[test]
    fn reruns_are_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let cfg = small_config(9);
        let out_a = generate_dataset(&cfg, a.path()).unwrap();
        generate_dataset(&cfg, b.path()).unwrap();
        assert_eq!(out_a.manifest.records.len() + out_a.skipped.len(), 6);
        assert_eq!(dir_bytes(a.path()), dir_bytes(b.path()));
    }

    #[test]
    fn emitted_samples_validate() {
        let dir = tempfile::tempdir().unwrap();
        let out = generate_dataset(&small_config(4), dir.path()).unwrap();
        assert!(!out.manifest.records.is_empty());
        let report = validate_dataset(dir.path()).unwrap();
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        assert_eq!(report.samples, out.manifest.records.len());
        let c = out.manifest.counts();
        assert!(c.train > 0 && c.test > 0);
    }

    #[test]
    fn unseen_families_are_tagged() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = DatasetConfig {
            unseen_families: vec![MapFamily::Maze],
            maps_per_family: 2,
            ..small_config(5)
        };
        let out = generate_dataset(&cfg, dir.path()).unwrap();
        assert!(out
            .manifest
            .records
            .iter()
            .all(|r| (r.family == MapFamily::Maze) == (r.split == Split::Unseen)));
        assert!(out.manifest.counts().unseen > 0);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = small_config(1);
        for cfg in [
            DatasetConfig { pairs_min: 5, pairs_max: 4, ..base.clone() },
            DatasetConfig { families: vec![], ..base.clone() },
            DatasetConfig { train_fraction: 1.0, ..base.clone() },
            DatasetConfig { unseen_families: vec![MapFamily::ScatteredBlocks], ..base.clone() },
        ] {
            assert!(cfg.validate().is_err());
        }
    }
}
