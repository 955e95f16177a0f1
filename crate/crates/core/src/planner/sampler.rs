use rand::Rng;

use crate::gridworld::{GridMap, State};
use crate::region::HeuristicSet;
use crate::{Error, Result};

use super::PlannerParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleSource {
    Uniform,
    Goal,
    Heuristic,
}

/// Mixed uniform / heuristic target sampler.
///
/// Every draw first consumes `u ~ U[0, 100)`. If `u > mu` and a heuristic set
/// is present the target comes from the heuristic set. Otherwise the uniform
/// branch runs: with probability `goal_sample_rate` the goal itself, else a
/// point uniform over the free cells. The `u` draw happens even without a
/// heuristic set, so a sampler with `mu = 100` yields exactly the same stream
/// as a purely uniform one.
#[derive(Clone, Debug)]
pub struct Sampler<'a> {
    width: usize,
    free_cells: Vec<u32>,
    goal: State,
    goal_sample_rate: f64,
    mu: f64,
    heuristic: Option<&'a HeuristicSet>,
}

impl<'a> Sampler<'a> {
    pub fn new(
        map: &GridMap,
        goal: State,
        mu: f64,
        goal_sample_rate: f64,
        heuristic: Option<&'a HeuristicSet>,
    ) -> Result<Self> {
        let free_cells = map.free_cell_indices();
        if free_cells.is_empty() {
            return Err(Error::domain("map has no free cell to sample from"));
        }
        if !(0.0..=100.0).contains(&mu) {
            return Err(Error::domain(format!("mu must lie in [0, 100], got {mu}")));
        }
        Ok(Sampler {
            width: map.width(),
            free_cells,
            goal,
            goal_sample_rate,
            mu,
            heuristic,
        })
    }

    /// Uniform sampler with goal bias, as used by plain RRT and RRT*.
    pub fn uniform(map: &GridMap, goal: State, params: &PlannerParams) -> Result<Self> {
        Self::new(map, goal, 100.0, params.goal_sample_rate, None)
    }

    /// Sampler configured from planner parameters and an optional heuristic set.
    pub fn from_params(
        map: &GridMap,
        goal: State,
        params: &PlannerParams,
        heuristic: Option<&'a HeuristicSet>,
    ) -> Result<Self> {
        Self::new(map, goal, params.mu, params.goal_sample_rate, heuristic)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn has_heuristic(&self) -> bool {
        self.heuristic.is_some()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (State, SampleSource) {
        let u: f64 = rng.gen::<f64>() * 100.0;
        if u > self.mu {
            if let Some(h) = self.heuristic {
                return (h.draw(rng), SampleSource::Heuristic);
            }
        }
        if rng.gen::<f64>() < self.goal_sample_rate {
            return (self.goal, SampleSource::Goal);
        }
        (self.uniform_free(rng), SampleSource::Uniform)
    }

    /// Point uniformly distributed over the free space.
    pub fn uniform_free<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        let cell = self.free_cells[rng.gen_range(0..self.free_cells.len())] as usize;
        let (cx, cy) = (cell % self.width, cell / self.width);
        State::new(cx as f64 + rng.gen::<f64>(), cy as f64 + rng.gen::<f64>())
    }
}
