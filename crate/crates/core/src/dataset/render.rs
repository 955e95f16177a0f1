//! Points images and trainer-resolution resizing.

use image::RgbImage;

use crate::gridworld::{disk_cells, render_map_image, GridMap, State, BLUE, RED, WHITE};
use crate::region::{render_region_image, RegionMask};
use crate::{Error, Result};

/// Start/goal disk radius at full resolution.
pub const POINTS_RADIUS: u32 = 3;
/// Start/goal disk radius after resizing to [`TRAINER_SIDE`].
pub const TRAINER_POINTS_RADIUS: u32 = 2;
/// Side of the square images fed to the region generator.
pub const TRAINER_SIDE: usize = 64;

/// White image with a red disk at `init` and a blue disk at `goal`. The goal
/// disk is drawn last.
pub fn render_points_image(
    map: &GridMap,
    init: &State,
    goal: &State,
    disk_radius: u32,
) -> Result<RgbImage> {
    for (name, s) in [("start", init), ("goal", goal)] {
        if !map.is_free(s)? {
            return Err(Error::domain(format!("{name} {s} lies on an obstacle")));
        }
    }
    let (w, h) = (map.width(), map.height());
    let mut img = RgbImage::from_pixel(w as u32, h as u32, WHITE);
    for (center, color) in [(init, RED), (goal, BLUE)] {
        for (x, y) in disk_cells(center, disk_radius, w, h) {
            img.put_pixel(x as u32, y as u32, color);
        }
    }
    Ok(img)
}

/// Source pixel range `[lo, hi)` covered by target pixel `t` when `src`
/// pixels are squeezed into `dst`. A source pixel counts as covered when it
/// overlaps the target footprint with positive length.
fn covered(t: usize, src: usize, dst: usize) -> std::ops::Range<usize> {
    let lo = t * src / dst;
    let hi = ((t + 1) * src).div_ceil(dst);
    lo..hi.min(src)
}

/// Downsamples a boolean raster to `side x side`: a target pixel is set when
/// any covered source pixel is set.
pub fn downsample_any(cells: &[bool], width: usize, height: usize, side: usize) -> Vec<bool> {
    let mut out = vec![false; side * side];
    for ty in 0..side {
        let ys = covered(ty, height, side);
        for tx in 0..side {
            let xs = covered(tx, width, side);
            out[ty * side + tx] = ys
                .clone()
                .any(|y| xs.clone().any(|x| cells[y * width + x]));
        }
    }
    out
}

/// Maps a full-resolution point into a `side x side` image of the same extent.
pub fn scale_state(s: &State, width: usize, height: usize, side: usize) -> State {
    State::new(
        s.x * side as f64 / width as f64,
        s.y * side as f64 / height as f64,
    )
}

/// Map, points and region at trainer resolution.
#[derive(Clone, Debug)]
pub struct ResizedTriple {
    pub map: GridMap,
    pub map_image: RgbImage,
    pub points_image: RgbImage,
    pub region: RegionMask,
    pub region_image: RgbImage,
}

/// Obstacles and region members survive any reduction; start and goal are
/// redrawn as disks at the scaled coordinates instead of being resampled.
pub fn resize_for_trainer(
    map: &GridMap,
    region: &RegionMask,
    init: &State,
    goal: &State,
    side: usize,
) -> Result<ResizedTriple> {
    if side < 2 {
        return Err(Error::domain(format!("resize side must be at least 2, got {side}")));
    }
    if !region.matches(map) {
        return Err(Error::domain("region and map dimensions differ"));
    }
    let (w, h) = (map.width(), map.height());
    let small = GridMap::from_cells(side, side, downsample_any(map.cells(), w, h, side))?;
    let small_region = RegionMask::from_cells(side, side, downsample_any(region.cells(), w, h, side))?;
    let (si, sg) = (scale_state(init, w, h, side), scale_state(goal, w, h, side));
    let mut points_image = RgbImage::from_pixel(side as u32, side as u32, WHITE);
    for (center, color) in [(si, RED), (sg, BLUE)] {
        for (x, y) in disk_cells(&center, TRAINER_POINTS_RADIUS, side, side) {
            points_image.put_pixel(x as u32, y as u32, color);
        }
    }
    Ok(ResizedTriple {
        map_image: render_map_image(&small),
        region_image: render_region_image(&small_region, &small, Some((si, sg))),
        map: small,
        points_image,
        region: small_region,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use proptest::prelude::*;

    #[test]
    fn points_image_examples() {
        let map = GridMap::empty(50, 50).unwrap();
        let img =
            render_points_image(&map, &State::new(10.0, 10.0), &State::new(40.0, 40.0), 3).unwrap();
        assert_eq!(img.get_pixel(10, 10), &RED);
        assert_eq!(img.get_pixel(40, 40), &BLUE);
        assert_eq!(img.get_pixel(25, 25), &WHITE);
        let dot =
            render_points_image(&map, &State::new(10.0, 10.0), &State::new(40.0, 40.0), 0).unwrap();
        assert_eq!(dot.pixels().filter(|p| **p == RED).count(), 1);
        assert_eq!(dot.pixels().filter(|p| **p == BLUE).count(), 1);
    }

    #[test]
    fn points_on_obstacles_are_rejected() {
        let map = GridMap::from_fn(20, 20, |x, y| x == 5 && y == 5).unwrap();
        let r = render_points_image(&map, &State::new(5.5, 5.5), &State::new(15.0, 15.0), 3);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn all_free_map_stays_free() {
        let map = GridMap::empty(201, 201).unwrap();
        let mask = RegionMask::empty(201, 201);
        let t = resize_for_trainer(&map, &mask, &State::new(5.0, 5.0), &State::new(190.0, 190.0), 64)
            .unwrap();
        assert_eq!((t.map.width(), t.map.height()), (64, 64));
        assert_eq!(t.map.obstacle_count(), 0);
    }

    #[test]
    fn every_single_obstacle_survives() {
        for (x, y) in [(0, 0), (200, 200), (100, 3), (57, 199), (63, 64)] {
            let map = GridMap::from_fn(201, 201, |cx, cy| (cx, cy) == (x, y)).unwrap();
            let small = downsample_any(map.cells(), 201, 201, 64);
            assert!(small.iter().filter(|&&o| o).count() >= 1, "({x}, {y})");
        }
    }

    #[test]
    fn start_disk_lands_at_scaled_coordinates() {
        let map = GridMap::empty(201, 201).unwrap();
        let mask = RegionMask::empty(201, 201);
        let t = resize_for_trainer(&map, &mask, &State::new(100.0, 100.0), &State::new(10.0, 10.0), 64)
            .unwrap();
        let red: Vec<(u32, u32)> = t
            .points_image
            .enumerate_pixels()
            .filter(|(_, _, p)| **p == RED)
            .map(|(x, y, _)| (x, y))
            .collect();
        let n = red.len() as f64;
        let cx = red.iter().map(|p| p.0 as f64).sum::<f64>() / n;
        let cy = red.iter().map(|p| p.1 as f64).sum::<f64>() / n;
        assert!((31.0..=32.0).contains(&cx) && (31.0..=32.0).contains(&cy), "({cx}, {cy})");
    }

    /// Brute-force reference: target pixel `t` covers source pixel `s` when
    /// `[s, s+1)` and `[t*src/dst, (t+1)*src/dst)` overlap with positive length.
    fn brute_force_any(cells: &[bool], w: usize, h: usize, side: usize) -> Vec<bool> {
        let overlaps = |s: usize, t: usize, src: usize| {
            let lo = t as f64 * src as f64 / side as f64;
            let hi = (t + 1) as f64 * src as f64 / side as f64;
            (s as f64) < hi && (s + 1) as f64 > lo
        };
        (0..side * side)
            .map(|i| {
                let (tx, ty) = (i % side, i / side);
                (0..h).any(|y| {
                    overlaps(y, ty, h) && (0..w).any(|x| overlaps(x, tx, w) && cells[y * w + x])
                })
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn downsample_matches_brute_force_coverage(
            w in 8usize..80, h in 8usize..80, side in 2usize..20, s in any::<u64>(), p in 1u64..40,
        ) {
            let cells: Vec<bool> = (0..w * h)
                .map(|i| seed::derive(s, &[i as u64]) % 100 < p)
                .collect();
            prop_assert_eq!(
                downsample_any(&cells, w, h, side),
                brute_force_any(&cells, w, h, side)
            );
        }
    }
}
