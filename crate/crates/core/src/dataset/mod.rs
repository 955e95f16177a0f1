//! Dataset factory for (map, points, region) triples.
//!
//! On disk a dataset is a flat directory:
//!
//! ```text
//! DIR/<id>_map.png      black obstacles on white
//! DIR/<id>_points.png   red start disk and blue goal disk on white
//! DIR/<id>_region.png   green region, black obstacles, red/blue markers
//! DIR/manifest.jsonl    one ManifestRecord per line
//! ```

mod generate;
mod render;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::gridworld::{load_map, load_rgb, GridMap, MapFamily, State};
use crate::planner::PlanningProblem;
use crate::region::{decode_region, RegionMask};
use crate::seed;
use crate::{Error, Result};

pub use generate::{generate_dataset, DatasetConfig, DatasetOutput, SkippedSample};
pub use render::{
    downsample_any, render_points_image, resize_for_trainer, scale_state, ResizedTriple,
    POINTS_RADIUS, TRAINER_POINTS_RADIUS, TRAINER_SIDE,
};
pub use validate::{validate_dataset, ValidationReport};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    Unseen,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Unseen => "unseen",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            "unseen" => Ok(Split::Unseen),
            _ => Err(Error::Config(format!(
                "unknown split {s:?}; expected train, test or unseen"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleFiles {
    pub map: String,
    pub points: String,
    pub region: String,
}

impl SampleFiles {
    pub fn for_id(id: &str) -> Self {
        SampleFiles {
            map: format!("{id}_map.png"),
            points: format!("{id}_points.png"),
            region: format!("{id}_region.png"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub split: Split,
    pub family: MapFamily,
    pub map_seed: u64,
    pub init: State,
    pub goal: State,
    pub goal_radius: f64,
    pub n_runs: usize,
    pub stroke: f64,
    pub files: SampleFiles,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub test: usize,
    pub unseen: usize,
}

impl SplitCounts {
    pub fn total(&self) -> usize {
        self.train + self.test + self.unseen
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn counts(&self) -> SplitCounts {
        let mut c = SplitCounts::default();
        for r in &self.records {
            match r.split {
                Split::Train => c.train += 1,
                Split::Test => c.test += 1,
                Split::Unseen => c.unseen += 1,
            }
        }
        c
    }

    pub fn with_split(&self, split: Split) -> impl Iterator<Item = &ManifestRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
        }
        out.flush().map_err(|e| Error::io(&path, e))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut records = Vec::new();
        for line in std::io::BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(&path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line)?);
        }
        Ok(Manifest { records })
    }
}

/// Reassigns train/test tags by environment map: all samples sharing a map
/// land in the same split. The train share of maps is rounded and clamped so
/// that both sides keep at least one map. Unseen samples keep their tag. Deterministic in
/// `seed`.
pub fn split(manifest: &Manifest, train_fraction: f64, seed: u64) -> Result<Manifest> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::domain(format!(
            "train fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    let maps: BTreeSet<(MapFamily, u64)> = manifest
        .records
        .iter()
        .filter(|r| r.split != Split::Unseen)
        .map(|r| (r.family, r.map_seed))
        .collect();
    let mut maps: Vec<_> = maps.into_iter().collect();
    if maps.len() < 2 {
        return Err(Error::domain(format!(
            "cannot split {} map(s): both splits need at least one map",
            maps.len()
        )));
    }
    // Rounded share of maps, kept away from the ends so neither side is empty.
    let n_train = ((train_fraction * maps.len() as f64).round() as usize).clamp(1, maps.len() - 1);
    maps.shuffle(&mut seed::rng(seed));
    let assignment: BTreeMap<(MapFamily, u64), Split> = maps
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, if i < n_train { Split::Train } else { Split::Test }))
        .collect();
    let records = manifest
        .records
        .iter()
        .map(|r| {
            let mut r = r.clone();
            if r.split != Split::Unseen {
                r.split = assignment[&(r.family, r.map_seed)];
            }
            r
        })
        .collect();
    Ok(Manifest { records })
}

/// A sample loaded back from disk.
#[derive(Clone, Debug)]
pub struct LoadedSample {
    pub record: ManifestRecord,
    pub problem: PlanningProblem,
    pub region: RegionMask,
}

pub fn load_sample(dir: &Path, record: &ManifestRecord) -> Result<LoadedSample> {
    let map: Arc<GridMap> = Arc::new(load_map(dir.join(&record.files.map))?);
    let region_img = load_rgb(dir.join(&record.files.region))?;
    let region = decode_region(&region_img, &map)?;
    let problem = PlanningProblem::new(map, record.init, record.goal, record.goal_radius)?;
    Ok(LoadedSample {
        record: record.clone(),
        problem,
        region,
    })
}
