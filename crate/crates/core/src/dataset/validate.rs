//! Dataset checker.

use std::collections::BTreeSet;
use std::path::Path;

use image::{Rgb, RgbImage};

use crate::gridworld::{decode_map, load_rgb, State, BLUE, RED};
use crate::region::decode_region;
use crate::{Error, Result};

use super::{Manifest, ManifestRecord};

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub samples: usize,
    pub violations: Vec<String>,
}

/// Number of 4-connected components of pixels equal to `color`, and whether
/// one of them contains `(x, y)`.
fn components(img: &RgbImage, color: Rgb<u8>, at: (u32, u32)) -> (usize, bool) {
    let (w, h) = img.dimensions();
    let mut seen = vec![false; (w * h) as usize];
    let mut count = 0;
    let mut contains = false;
    for (sx, sy, px) in img.enumerate_pixels() {
        if *px != color || seen[(sy * w + sx) as usize] {
            continue;
        }
        count += 1;
        let mut stack = vec![(sx, sy)];
        seen[(sy * w + sx) as usize] = true;
        while let Some((x, y)) = stack.pop() {
            contains |= (x, y) == at;
            let neighbors = [
                (x.wrapping_sub(1), y),
                (x + 1, y),
                (x, y.wrapping_sub(1)),
                (x, y + 1),
            ];
            for (nx, ny) in neighbors {
                if nx < w && ny < h && !seen[(ny * w + nx) as usize] && *img.get_pixel(nx, ny) == color
                {
                    seen[(ny * w + nx) as usize] = true;
                    stack.push((nx, ny));
                }
            }
        }
    }
    (count, contains)
}

fn cell_of(s: &State) -> (u32, u32) {
    (s.x.max(0.0).floor() as u32, s.y.max(0.0).floor() as u32)
}

fn check_sample(dir: &Path, r: &ManifestRecord) -> std::result::Result<(), String> {
    let load = |name: &str| load_rgb(dir.join(name)).map_err(|e| e.to_string());
    let map_img = load(&r.files.map)?;
    let points = load(&r.files.points)?;
    let region = load(&r.files.region)?;
    let dims = map_img.dimensions();
    if points.dimensions() != dims || region.dimensions() != dims {
        return Err(format!(
            "raster sizes differ: map {:?}, points {:?}, region {:?}",
            dims,
            points.dimensions(),
            region.dimensions()
        ));
    }
    let map = decode_map(&map_img, &r.files.map).map_err(|e| e.to_string())?;
    for (name, s, color) in [("start", &r.init, RED), ("goal", &r.goal, BLUE)] {
        if !map.is_free(s).unwrap_or(false) {
            return Err(format!("{name} {s} is not a free pixel"));
        }
        let (n, contains) = components(&points, color, cell_of(s));
        if n != 1 || !contains {
            return Err(format!(
                "{name} marker: {n} disk(s), covering {s}: {contains}"
            ));
        }
    }
    let mask = decode_region(&region, &map).map_err(|e| e.to_string())?;
    if !mask.is_obstacle_free(&map) {
        return Err("region covers obstacle pixels".into());
    }
    Ok(())
}

fn count_suffix(dir: &Path, suffix: &str) -> Result<usize> {
    let mut n = 0;
    for e in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let e = e.map_err(|e| Error::io(dir, e))?;
        if e.file_type().map(|t| t.is_file()).unwrap_or(false)
            && e.file_name().to_string_lossy().ends_with(suffix)
        {
            n += 1;
        }
    }
    Ok(n)
}

/// Checks every manifest row against the files in `dir` and the manifest
/// against the directory listing. Problems are collected, not fatal; only an
/// unreadable manifest or directory is an error.
pub fn validate_dataset(dir: &Path) -> Result<ValidationReport> {
    let manifest = Manifest::read(dir)?;
    let mut violations = Vec::new();
    let mut ids = BTreeSet::new();
    for r in &manifest.records {
        if !ids.insert(r.id.as_str()) {
            violations.push(format!("{}: duplicate id", r.id));
        }
        if let Err(v) = check_sample(dir, r) {
            violations.push(format!("{}: {v}", r.id));
        }
    }
    for suffix in ["_map.png", "_points.png", "_region.png"] {
        let on_disk = count_suffix(dir, suffix)?;
        if on_disk != manifest.records.len() {
            violations.push(format!(
                "{on_disk} *{suffix} files on disk but {} manifest rows",
                manifest.records.len()
            ));
        }
    }
    Ok(ValidationReport {
        samples: manifest.records.len(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{save_map, save_rgb, GridMap, MapFamily};
    use crate::dataset::{render_points_image, SampleFiles, Split};
    use crate::region::{render_region_image, RegionMask};

    fn write_one(dir: &Path, id: &str) -> ManifestRecord {
        let map = GridMap::from_fn(30, 30, |x, _| x == 15).unwrap();
        let (init, goal) = (State::new(5.5, 5.5), State::new(25.5, 25.5));
        let files = SampleFiles::for_id(id);
        save_map(&map, dir.join(&files.map)).unwrap();
        save_rgb(
            &render_points_image(&map, &init, &goal, 3).unwrap(),
            dir.join(&files.points),
        )
        .unwrap();
        let mut mask = RegionMask::empty(30, 30);
        mask.set(3, 3, true);
        save_rgb(
            &render_region_image(&mask, &map, Some((init, goal))),
            dir.join(&files.region),
        )
        .unwrap();
        ManifestRecord {
            id: id.into(),
            split: Split::Train,
            family: MapFamily::WallGaps,
            map_seed: 1,
            init,
            goal,
            goal_radius: 3.0,
            n_runs: 1,
            stroke: 5.0,
            files,
        }
    }

    #[test]
    fn clean_sample_passes() {
        let dir = tempfile::tempdir().unwrap();
        let r = write_one(dir.path(), "a");
        Manifest { records: vec![r] }.write(dir.path()).unwrap();
        let report = validate_dataset(dir.path()).unwrap();
        assert_eq!(report.samples, 1);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
    }

    #[test]
    fn detects_missing_marker_and_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let r = write_one(dir.path(), "a");
        write_one(dir.path(), "orphan");
        let blank = RgbImage::from_pixel(30, 30, crate::gridworld::WHITE);
        save_rgb(&blank, dir.path().join(&r.files.points)).unwrap();
        Manifest { records: vec![r] }.write(dir.path()).unwrap();
        let report = validate_dataset(dir.path()).unwrap();
        assert!(report.violations.iter().any(|v| v.contains("start marker")));
        assert!(report.violations.iter().any(|v| v.contains("files on disk")));
    }

    #[test]
    fn detects_colored_region_over_obstacle() {
        let dir = tempfile::tempdir().unwrap();
        let r = write_one(dir.path(), "a");
        let mut img = load_rgb(dir.path().join(&r.files.region)).unwrap();
        img.put_pixel(15, 10, crate::gridworld::GREEN);
        save_rgb(&img, dir.path().join(&r.files.region)).unwrap();
        Manifest { records: vec![r] }.write(dir.path()).unwrap();
        let report = validate_dataset(dir.path()).unwrap();
        assert_eq!(report.violations.len(), 1, "{:?}", report.violations);
    }
}
