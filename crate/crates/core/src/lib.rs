//! Sampling-based path planning on pixel-grid worlds.
//!
//! The crate bundles the pieces needed to study region-guided RRT*:
//!
//! * [`gridworld`]: occupancy rasters, random map families, collision queries and image I/O.
//! * [`planner`]: RRT and RRT* with a mixed uniform / heuristic sampler.
//! * [`region`]: promising-region masks, ground-truth regions built from repeated RRT runs,
//!   discretization into a heuristic sample set and the connectivity check.
//! * [`dataset`]: (map, points, region) triples on disk plus a JSON-lines manifest.
//! * [`bench`]: repeated uniform vs heuristic RRT* trials, aggregation and plot data.
//! * [`cli`]: the `regionrrt` command line front end.

pub mod bench;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod gridworld;
pub mod planner;
pub mod region;
pub mod seed;
mod table;

pub use error::{Error, Result};
pub use gridworld::{GridMap, MapFamily, MapSpec, State};
pub use planner::{PlanResult, PlannerParams, PlanningProblem};
pub use region::{HeuristicSet, RegionMask};
