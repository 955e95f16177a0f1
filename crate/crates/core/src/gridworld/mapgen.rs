//! Random map families.
//!
//! Five hand-designed, seeded families of obstacle layouts. Every family is
//! driven by a single `density` knob in `[0, 1]` whose meaning depends on the
//! family. Generated maps always keep at least 10% free cells and at least one
//! free cell on each of two opposite borders; a layout that violates this is
//! discarded and regenerated from a derived seed.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GridMap, DEFAULT_MAP_SIDE};
use crate::seed::{self, SeededRng};
use crate::{Error, Result};

pub const MAX_GENERATION_ATTEMPTS: usize = 32;

const MIN_FREE_FRACTION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapFamily {
    /// Axis-aligned square blocks; density is the target obstacle coverage.
    ScatteredBlocks,
    /// Parallel walls pierced by gaps; density scales the number of walls.
    WallGaps,
    /// Perfect maze with wide corridors; lower density opens extra loops.
    Maze,
    /// A grid of rooms joined by doors; density scales room count and furniture.
    Rooms,
    /// Mixed rectangles, disks and bars; density is the target coverage.
    MixedClutter,
}

impl MapFamily {
    pub const ALL: [MapFamily; 5] = [
        MapFamily::ScatteredBlocks,
        MapFamily::WallGaps,
        MapFamily::Maze,
        MapFamily::Rooms,
        MapFamily::MixedClutter,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MapFamily::ScatteredBlocks => "scattered-blocks",
            MapFamily::WallGaps => "wall-gaps",
            MapFamily::Maze => "maze",
            MapFamily::Rooms => "rooms",
            MapFamily::MixedClutter => "mixed-clutter",
        }
    }

    pub fn default_density(&self) -> f64 {
        match self {
            MapFamily::ScatteredBlocks => 0.3,
            MapFamily::WallGaps => 0.5,
            MapFamily::Maze => 0.5,
            MapFamily::Rooms => 0.5,
            MapFamily::MixedClutter => 0.25,
        }
    }
}

impl std::fmt::Display for MapFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MapFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MapFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown map family {s:?}; expected one of {}",
                    MapFamily::ALL.map(|f| f.name()).join(", ")
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub family: MapFamily,
    pub width: usize,
    pub height: usize,
    pub density: f64,
    pub seed: u64,
}

impl MapSpec {
    /// Default-sized map with the family's default density.
    pub fn new(family: MapFamily, seed: u64) -> Self {
        MapSpec {
            family,
            width: DEFAULT_MAP_SIDE,
            height: DEFAULT_MAP_SIDE,
            density: family.default_density(),
            seed,
        }
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn with_size(mut self, width: usize, height: usize) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.density) {
            return Err(Error::domain(format!(
                "density must lie in [0, 1], got {}",
                self.density
            )));
        }
        if self.width < 16 || self.height < 16 {
            return Err(Error::domain(format!(
                "generated maps must be at least 16x16, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

/// Generates a map. Pure function of `spec`.
pub fn generate_map(spec: &MapSpec) -> Result<GridMap> {
    spec.validate()?;
    let mut last_reason = String::new();
    for attempt in 0..MAX_GENERATION_ATTEMPTS {
        let mut rng = seed::rng(seed::derive(spec.seed, &[attempt as u64]));
        let mut canvas = Canvas::new(spec.width, spec.height);
        match spec.family {
            MapFamily::ScatteredBlocks => scattered_blocks(&mut canvas, spec.density, &mut rng),
            MapFamily::WallGaps => wall_gaps(&mut canvas, spec.density, &mut rng),
            MapFamily::Maze => maze(&mut canvas, spec.density, &mut rng),
            MapFamily::Rooms => rooms(&mut canvas, spec.density, &mut rng),
            MapFamily::MixedClutter => mixed_clutter(&mut canvas, spec.density, &mut rng),
        }
        let map = canvas.into_map()?;
        if map.free_fraction() < MIN_FREE_FRACTION {
            last_reason = format!("free fraction {:.3} below 0.1", map.free_fraction());
        } else if !map.has_free_opposite_borders() {
            last_reason = "no pair of opposite borders with free cells".into();
        } else {
            return Ok(map);
        }
    }
    Err(Error::Generation {
        attempts: MAX_GENERATION_ATTEMPTS,
        reason: last_reason,
    })
}

struct Canvas {
    width: usize,
    height: usize,
    cells: Vec<bool>,
    filled: usize,
}

impl Canvas {
    fn new(width: usize, height: usize) -> Self {
        Canvas {
            width,
            height,
            cells: vec![false; width * height],
            filled: 0,
        }
    }

    fn coverage(&self) -> f64 {
        self.filled as f64 / self.cells.len() as f64
    }

    fn set(&mut self, x: usize, y: usize, value: bool) {
        let cell = &mut self.cells[y * self.width + x];
        if *cell != value {
            *cell = value;
            if value {
                self.filled += 1;
            } else {
                self.filled -= 1;
            }
        }
    }

    /// Fills `[x0, x1) x [y0, y1)`, clipped to the canvas.
    fn rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, value: bool) {
        let cx0 = x0.clamp(0, self.width as i64) as usize;
        let cx1 = x1.clamp(0, self.width as i64) as usize;
        let cy0 = y0.clamp(0, self.height as i64) as usize;
        let cy1 = y1.clamp(0, self.height as i64) as usize;
        for y in cy0..cy1 {
            for x in cx0..cx1 {
                self.set(x, y, value);
            }
        }
    }

    fn disk(&mut self, cx: i64, cy: i64, r: i64) {
        for y in (cy - r).max(0)..=(cy + r).min(self.height as i64 - 1) {
            for x in (cx - r).max(0)..=(cx + r).min(self.width as i64 - 1) {
                if (x - cx).pow(2) + (y - cy).pow(2) <= r * r {
                    self.set(x as usize, y as usize, true);
                }
            }
        }
    }

    fn into_map(self) -> Result<GridMap> {
        GridMap::from_cells(self.width, self.height, self.cells)
    }
}

fn scaled(side: usize, divisor: usize, min: usize) -> usize {
    (side / divisor).max(min)
}

fn scattered_blocks(canvas: &mut Canvas, density: f64, rng: &mut SeededRng) {
    let side = canvas.width.min(canvas.height);
    let lo = scaled(side, 33, 2);
    let hi = scaled(side, 9, lo + 1);
    let mut tries = 0;
    while canvas.coverage() < density && tries < 100_000 {
        tries += 1;
        let bw = rng.gen_range(lo..=hi) as i64;
        let bh = rng.gen_range(lo..=hi) as i64;
        let x = rng.gen_range(0..canvas.width) as i64;
        let y = rng.gen_range(0..canvas.height) as i64;
        canvas.rect(x, y, x + bw, y + bh, true);
    }
}

fn wall_gaps(canvas: &mut Canvas, density: f64, rng: &mut SeededRng) {
    let n_walls = (density * 8.0).round() as usize;
    let vertical = rng.gen_bool(0.5);
    let (across, along) = if vertical {
        (canvas.width, canvas.height)
    } else {
        (canvas.height, canvas.width)
    };
    let thickness = scaled(across, 50, 1) as i64;
    let gap_lo = scaled(along, 12, 3);
    let gap_hi = scaled(along, 8, gap_lo + 1);
    let spacing = across as f64 / (n_walls + 1) as f64;
    for k in 0..n_walls {
        let jitter = rng.gen_range(-0.15..=0.15) * spacing;
        let pos = ((k + 1) as f64 * spacing + jitter).round() as i64 - thickness / 2;
        let wall = |a0: i64, a1: i64, canvas: &mut Canvas, value: bool| {
            if vertical {
                canvas.rect(pos, a0, pos + thickness, a1, value);
            } else {
                canvas.rect(a0, pos, a1, pos + thickness, value);
            }
        };
        wall(0, along as i64, canvas, true);
        let gaps = rng.gen_range(1..=2);
        for _ in 0..gaps {
            let g = rng.gen_range(gap_lo..=gap_hi) as i64;
            let start = rng.gen_range(0..=(along as i64 - g));
            wall(start, start + g, canvas, false);
        }
    }
}

/// Boundaries of `n` equal cells spanning `len` pixels.
fn cell_bounds(len: usize, n: usize) -> Vec<i64> {
    (0..=n).map(|i| (i * len / n) as i64).collect()
}

/// Randomized depth-first spanning tree over an `nx x ny` cell grid. Returns
/// the set of opened passages as `(cell, neighbor)` pairs with `cell < neighbor`.
fn spanning_tree(nx: usize, ny: usize, rng: &mut SeededRng) -> Vec<(usize, usize)> {
    let mut visited = vec![false; nx * ny];
    let mut stack = vec![0usize];
    let mut open = Vec::new();
    visited[0] = true;
    while let Some(&cur) = stack.last() {
        let (cx, cy) = (cur % nx, cur / nx);
        let mut next = Vec::with_capacity(4);
        if cx > 0 {
            next.push(cur - 1);
        }
        if cx + 1 < nx {
            next.push(cur + 1);
        }
        if cy > 0 {
            next.push(cur - nx);
        }
        if cy + 1 < ny {
            next.push(cur + nx);
        }
        next.retain(|&n| !visited[n]);
        match next.choose(rng) {
            Some(&n) => {
                visited[n] = true;
                open.push((cur.min(n), cur.max(n)));
                stack.push(n);
            }
            None => {
                stack.pop();
            }
        }
    }
    open
}

/// Every wall between horizontally or vertically adjacent cells.
fn all_walls(nx: usize, ny: usize) -> Vec<(usize, usize)> {
    let mut walls = Vec::new();
    for cy in 0..ny {
        for cx in 0..nx {
            let c = cy * nx + cx;
            if cx + 1 < nx {
                walls.push((c, c + 1));
            }
            if cy + 1 < ny {
                walls.push((c, c + nx));
            }
        }
    }
    walls
}

/// Draws the wall between cells `a < b` of a grid with the given boundaries and
/// returns the filled rectangle as `(x0, y0, x1, y1)`.
fn draw_wall(
    canvas: &mut Canvas,
    (a, b): (usize, usize),
    nx: usize,
    xs: &[i64],
    ys: &[i64],
    thickness: i64,
) -> (i64, i64, i64, i64) {
    let (ax, ay) = (a % nx, a / nx);
    let half = thickness / 2;
    let rect = if b == a + 1 {
        // Vertical wall on the right edge of `a`.
        let x = xs[ax + 1];
        (x - half, ys[ay] - half, x - half + thickness, ys[ay + 1] - half + thickness)
    } else {
        let y = ys[ay + 1];
        (xs[ax] - half, y - half, xs[ax + 1] - half + thickness, y - half + thickness)
    };
    canvas.rect(rect.0, rect.1, rect.2, rect.3, true);
    rect
}

fn maze(canvas: &mut Canvas, density: f64, rng: &mut SeededRng) {
    let side = canvas.width.min(canvas.height);
    let n = (side / 25).max(2);
    let xs = cell_bounds(canvas.width, n);
    let ys = cell_bounds(canvas.height, n);
    let thickness = scaled(side, 60, 1) as i64;
    let open = spanning_tree(n, n, rng);
    let loop_prob = (1.0 - density) * 0.25;
    for wall in all_walls(n, n) {
        if open.contains(&wall) {
            continue;
        }
        if rng.gen_bool(loop_prob) {
            continue;
        }
        draw_wall(canvas, wall, n, &xs, &ys, thickness);
    }
}

fn rooms(canvas: &mut Canvas, density: f64, rng: &mut SeededRng) {
    let side = canvas.width.min(canvas.height);
    let n = 2 + (density * 2.0).round() as usize;
    let xs = cell_bounds(canvas.width, n);
    let ys = cell_bounds(canvas.height, n);
    let thickness = scaled(side, 60, 1) as i64;
    let door_lo = scaled(side, 14, 3) as i64;
    let door_hi = scaled(side, 9, door_lo as usize + 1) as i64;
    let tree = spanning_tree(n, n, rng);
    for wall in all_walls(n, n) {
        let (x0, y0, x1, y1) = draw_wall(canvas, wall, n, &xs, &ys, thickness);
        let has_door = tree.contains(&wall) || rng.gen_bool(0.3);
        if !has_door {
            continue;
        }
        let door = rng.gen_range(door_lo..=door_hi);
        if wall.1 == wall.0 + 1 {
            let span = (y1 - y0 - 2 * thickness - door).max(0);
            let start = y0 + thickness + rng.gen_range(0..=span);
            canvas.rect(x0, start, x1, start + door, false);
        } else {
            let span = (x1 - x0 - 2 * thickness - door).max(0);
            let start = x0 + thickness + rng.gen_range(0..=span);
            canvas.rect(start, y0, start + door, y1, false);
        }
    }
    // Furniture: small blocks kept away from the walls so doors stay usable.
    let margin = door_hi;
    let block = scaled(side, 25, 1) as i64;
    for cy in 0..n {
        for cx in 0..n {
            let (x0, x1) = (xs[cx] + margin, xs[cx + 1] - margin - block);
            let (y0, y1) = (ys[cy] + margin, ys[cy + 1] - margin - block);
            if x1 <= x0 || y1 <= y0 {
                continue;
            }
            let count = (0..2).filter(|_| rng.gen_bool(density)).count();
            for _ in 0..count {
                let bx = rng.gen_range(x0..x1);
                let by = rng.gen_range(y0..y1);
                canvas.rect(bx, by, bx + block, by + block, true);
            }
        }
    }
}

fn mixed_clutter(canvas: &mut Canvas, density: f64, rng: &mut SeededRng) {
    let side = canvas.width.min(canvas.height);
    let small = scaled(side, 50, 1) as i64;
    let large = scaled(side, 7, small as usize + 1) as i64;
    let thin = scaled(side, 67, 1) as i64;
    let mut tries = 0;
    while canvas.coverage() < density && tries < 100_000 {
        tries += 1;
        let x = rng.gen_range(0..canvas.width) as i64;
        let y = rng.gen_range(0..canvas.height) as i64;
        match rng.gen_range(0..3) {
            0 => {
                let w = rng.gen_range(small..=large);
                let h = rng.gen_range(small..=large);
                canvas.rect(x, y, x + w, y + h, true);
            }
            1 => {
                let r = rng.gen_range(small.max(2)..=large / 2);
                canvas.disk(x, y, r);
            }
            _ => {
                let len = rng.gen_range(large..=2 * large);
                if rng.gen_bool(0.5) {
                    canvas.rect(x, y, x + len, y + thin, true);
                } else {
                    canvas.rect(x, y, x + thin, y + len, true);
                }
            }
        }
    }
}
