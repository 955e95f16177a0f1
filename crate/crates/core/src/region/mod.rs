//! Promising regions.
//!
//! A [`RegionMask`] marks the pixels where good paths are expected. Masks are
//! produced from repeated RRT runs ([`ground_truth_region`]) or decoded from a
//! predicted region image ([`decode_region`]). A mask becomes a sampling
//! distribution through [`RegionMask::discretize`] and is judged by the
//! task-level [`connectivity_check`].

mod connectivity;
mod ground_truth;
mod raster;

use image::RgbImage;
use rand::Rng;

use crate::gridworld::{disk_cells, GridMap, State, BLACK, BLUE, GREEN, RED, WHITE};
use crate::{Error, Result};

pub use connectivity::{connectivity_check, connectivity_map, success_rate, CONNECTIVITY_DISK_RADIUS};
pub use ground_truth::{ground_truth_region, GroundTruth, GroundTruthConfig};
pub use raster::{segment_touches_cell, stroke_segment};

/// Radius of the start/goal markers drawn into region images.
pub const REGION_MARKER_RADIUS: u32 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionMask {
    width: usize,
    height: usize,
    member: Vec<bool>,
}

impl RegionMask {
    pub fn empty(width: usize, height: usize) -> Self {
        RegionMask {
            width,
            height,
            member: vec![false; width * height],
        }
    }

    pub fn from_cells(width: usize, height: usize, member: Vec<bool>) -> Result<Self> {
        if member.len() != width * height {
            return Err(Error::domain(format!(
                "expected {} cells for a {width}x{height} mask, got {}",
                width * height,
                member.len()
            )));
        }
        Ok(RegionMask {
            width,
            height,
            member,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[bool] {
        &self.member
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.member[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.member[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.member.iter().any(|&m| m)
    }

    pub fn matches(&self, map: &GridMap) -> bool {
        self.width == map.width() && self.height == map.height()
    }

    /// Whether no member pixel is an obstacle of `map`.
    pub fn is_obstacle_free(&self, map: &GridMap) -> bool {
        self.matches(map)
            && self
                .member
                .iter()
                .zip(map.cells())
                .all(|(&m, &obstacle)| !(m && obstacle))
    }

    /// Drops member pixels that are obstacles of `map`.
    pub fn clip_to_free(&mut self, map: &GridMap) {
        for (m, &obstacle) in self.member.iter_mut().zip(map.cells()) {
            *m &= !obstacle;
        }
    }

    pub fn add_disk(&mut self, center: &State, radius: u32) {
        for (x, y) in disk_cells(center, radius, self.width, self.height) {
            self.set(x, y, true);
        }
    }

    /// Turns the mask into a heuristic sample set. An empty mask is an error
    /// telling the caller to sample uniformly instead.
    pub fn discretize(&self) -> Result<HeuristicSet> {
        let members: Vec<u32> = self
            .member
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i as u32)
            .collect();
        if members.is_empty() {
            return Err(Error::EmptyRegion);
        }
        Ok(HeuristicSet {
            width: self.width,
            members,
        })
    }
}

/// Discrete heuristic sample set built from the member pixels of a mask.
///
/// A draw picks a member pixel uniformly and then a point uniformly inside it.
/// Points may fall on obstacles when the mask came from a prediction; the
/// planner's edge check discards those.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeuristicSet {
    width: usize,
    members: Vec<u32>,
}

impl HeuristicSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member pixels as `(x, y)`.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.members
            .iter()
            .map(|&i| (i as usize % self.width, i as usize / self.width))
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        let cell = self.members[rng.gen_range(0..self.members.len())] as usize;
        let (cx, cy) = (cell % self.width, cell / self.width);
        State::new(cx as f64 + rng.gen::<f64>(), cy as f64 + rng.gen::<f64>())
    }
}

/// Whether an RGB pixel reads as promising-region green: green at least 128
/// and at least 32 above both red and blue.
pub fn is_region_green(px: [u8; 3]) -> bool {
    let [r, g, b] = px.map(i32::from);
    g >= 128 && g - r >= 32 && g - b >= 32
}

/// Decodes a region image against the map it belongs to.
pub fn decode_region(img: &RgbImage, map: &GridMap) -> Result<RegionMask> {
    let (w, h) = img.dimensions();
    if w as usize != map.width() || h as usize != map.height() {
        return Err(Error::domain(format!(
            "region image is {w}x{h} but the map is {}x{}",
            map.width(),
            map.height()
        )));
    }
    let member = img.pixels().map(|px| is_region_green(px.0)).collect();
    RegionMask::from_cells(w as usize, h as usize, member)
}

/// Renders a region image: member pixels green, remaining obstacles black,
/// everything else white. With `markers`, red and blue disks of
/// [`REGION_MARKER_RADIUS`] are drawn on the free pixels around the start and
/// goal.
pub fn render_region_image(
    mask: &RegionMask,
    map: &GridMap,
    markers: Option<(State, State)>,
) -> RgbImage {
    let mut img = RgbImage::from_fn(mask.width as u32, mask.height as u32, |x, y| {
        let (x, y) = (x as usize, y as usize);
        if mask.get(x, y) {
            GREEN
        } else if map.is_obstacle_cell(x, y) {
            BLACK
        } else {
            WHITE
        }
    });
    if let Some((init, goal)) = markers {
        for (center, color) in [(init, RED), (goal, BLUE)] {
            for (x, y) in disk_cells(&center, REGION_MARKER_RADIUS, mask.width, mask.height) {
                if !map.is_obstacle_cell(x, y) {
                    img.put_pixel(x as u32, y as u32, color);
                }
            }
        }
    }
    img
}
