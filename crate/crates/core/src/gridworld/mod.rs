//! Pixel-grid worlds.
//!
//! A [`GridMap`] is a row-major boolean raster where `true` marks an obstacle
//! cell. States are continuous; the cell holding a state is found with
//! `floor()`. Anything outside `[0, width) x [0, height)` is out of bounds and
//! treated as a collision by the planners.

mod image_io;
mod mapgen;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use image_io::{
    decode_map, encode_map, load_map, load_rgb, render_map_image, save_map, save_rgb, BLACK,
    BLUE, GREEN, RED, WHITE,
};
pub use mapgen::{generate_map, MapFamily, MapSpec, MAX_GENERATION_ATTEMPTS};

/// Largest spacing between consecutive samples of a segment collision check.
pub const SEGMENT_SAMPLE_SPACING: f64 = 0.5;

/// Default map side used throughout dataset generation and benchmarking.
pub const DEFAULT_MAP_SIDE: usize = 201;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub const fn new(x: f64, y: f64) -> Self {
        State { x, y }
    }

    /// Center of the pixel `(cx, cy)`.
    pub fn cell_center(cx: usize, cy: usize) -> Self {
        State::new(cx as f64 + 0.5, cy as f64 + 0.5)
    }

    pub fn distance(&self, other: &State) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_squared(&self, other: &State) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(&self, other: &State, t: f64) -> State {
        State::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

impl std::fmt::Display for State {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

impl std::str::FromStr for State {
    type Err = Error;

    /// Parses `"X,Y"`.
    fn from_str(s: &str) -> Result<Self> {
        let (x, y) = s
            .split_once(',')
            .ok_or_else(|| Error::domain(format!("expected X,Y but got {s:?}")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::domain(format!("bad coordinate {v:?} in {s:?}: {e}")))
        };
        let state = State::new(parse(x)?, parse(y)?);
        if !state.is_finite() {
            return Err(Error::domain(format!("non-finite coordinate in {s:?}")));
        }
        Ok(state)
    }
}

/// Pixels `(x, y)` with `(x - cx)^2 + (y - cy)^2 <= radius^2`, where
/// `(cx, cy)` is the cell holding `center`, clipped to a `width x height`
/// raster.
pub fn disk_cells(center: &State, radius: u32, width: usize, height: usize) -> Vec<(usize, usize)> {
    let cx = center.x.floor() as i64;
    let cy = center.y.floor() as i64;
    let r = radius as i64;
    let mut cells = Vec::new();
    for y in (cy - r).max(0)..=(cy + r).min(height as i64 - 1) {
        for x in (cx - r).max(0)..=(cx + r).min(width as i64 - 1) {
            if (x - cx).pow(2) + (y - cy).pow(2) <= r * r {
                cells.push((x as usize, y as usize));
            }
        }
    }
    cells
}

/// Binary occupancy raster. Immutable once built, so it can be shared freely
/// between concurrent planner runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<bool>,
}

impl GridMap {
    /// An obstacle-free map.
    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::from_cells(width, height, vec![false; width * height])
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<bool>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::domain(format!(
                "map must be at least 2x2, got {width}x{height}"
            )));
        }
        if cells.len() != width * height {
            return Err(Error::domain(format!(
                "expected {} cells for a {width}x{height} map, got {}",
                width * height,
                cells.len()
            )));
        }
        Ok(GridMap {
            width,
            height,
            cells,
        })
    }

    /// Builds a map by evaluating `obstacle(x, y)` for every cell.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut obstacle: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut cells = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                cells.push(obstacle(x, y));
            }
        }
        Self::from_cells(width, height, cells)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn diagonal(&self) -> f64 {
        (self.width as f64).hypot(self.height as f64)
    }

    #[inline]
    pub fn is_obstacle_cell(&self, cx: usize, cy: usize) -> bool {
        self.cells[cy * self.width + cx]
    }

    pub fn obstacle_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn free_count(&self) -> usize {
        self.cells.len() - self.obstacle_count()
    }

    pub fn free_fraction(&self) -> f64 {
        self.free_count() as f64 / self.cells.len() as f64
    }

    /// Indices (`y * width + x`) of all free cells in row-major order.
    pub fn free_cell_indices(&self) -> Vec<u32> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| i as u32)
            .collect()
    }

    pub fn in_bounds(&self, s: &State) -> bool {
        s.x >= 0.0 && s.y >= 0.0 && s.x < self.width as f64 && s.y < self.height as f64
    }

    fn check_bounds(&self, s: &State) -> Result<()> {
        if self.in_bounds(s) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                x: s.x,
                y: s.y,
                width: self.width,
                height: self.height,
            })
        }
    }

    /// Whether the cell containing `s` is free.
    pub fn is_free(&self, s: &State) -> Result<bool> {
        self.check_bounds(s)?;
        Ok(self.is_free_unchecked(s))
    }

    /// Like [`GridMap::is_free`] but out-of-bounds states simply count as
    /// collisions.
    #[inline]
    pub fn is_free_or_outside(&self, s: &State) -> bool {
        self.in_bounds(s) && self.is_free_unchecked(s)
    }

    #[inline]
    fn is_free_unchecked(&self, s: &State) -> bool {
        !self.is_obstacle_cell(s.x as usize, s.y as usize)
    }

    /// Samples the segment `ab` at spacing at most [`SEGMENT_SAMPLE_SPACING`],
    /// endpoints included, and reports whether every sample is free.
    ///
    /// Samples are placed symmetrically (`t = i / n`), so the result does not
    /// depend on the direction of the segment.
    pub fn segment_collision_free(&self, a: &State, b: &State) -> Result<bool> {
        self.check_bounds(a)?;
        self.check_bounds(b)?;
        Ok(self.segment_free_in_bounds(a, b))
    }

    /// Segment check for endpoints already known to be in bounds. The segment
    /// between two in-bounds points never leaves the map.
    pub(crate) fn segment_free_in_bounds(&self, a: &State, b: &State) -> bool {
        let steps = (a.distance(b) / SEGMENT_SAMPLE_SPACING).ceil() as usize;
        if steps == 0 {
            return self.is_free_unchecked(a);
        }
        // Endpoints first: they are the most likely to hit in practice.
        if !self.is_free_unchecked(a) || !self.is_free_unchecked(b) {
            return false;
        }
        let inv = 1.0 / steps as f64;
        (1..steps).all(|i| {
            // Mirror the parameter for the second half so sample positions are
            // bit-identical whichever endpoint comes first.
            let p = match (2 * i).cmp(&steps) {
                std::cmp::Ordering::Less => a.lerp(b, i as f64 * inv),
                std::cmp::Ordering::Equal => State::new((a.x + b.x) * 0.5, (a.y + b.y) * 0.5),
                std::cmp::Ordering::Greater => b.lerp(a, (steps - i) as f64 * inv),
            };
            self.is_free_unchecked(&p)
        })
    }

    /// Whether the map has at least one free cell on both the left and right
    /// borders, or on both the top and bottom borders.
    pub fn has_free_opposite_borders(&self) -> bool {
        let (w, h) = (self.width, self.height);
        let col_free = |x: usize| (0..h).any(|y| !self.is_obstacle_cell(x, y));
        let row_free = |y: usize| (0..w).any(|x| !self.is_obstacle_cell(x, y));
        (col_free(0) && col_free(w - 1)) || (row_free(0) && row_free(h - 1))
    }
}
