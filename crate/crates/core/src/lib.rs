//! Semantic navigation core: building hypergraph, room-level planning, grid
//! planning, particle-filter localization, occupancy merging, UWB anchor
//! localization and a small 2-D simulator.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `num_traits::Float` supplies float math without std. When another crate in
// the build links std (tests, dev-dependencies) the inherent methods win and
// the import looks unused.
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod building;
pub mod geometry;
pub mod grid;
pub mod gridplan;
pub mod localization;
pub mod merge;
pub mod planner;
pub mod sim;
pub mod time;
pub mod uwb;

pub use building::{BuildingGraph, WeightConfig};
pub use geometry::{Point2, Point3, Pose2D};
pub use grid::{ClassId, ClassMask, SemanticOccupancyGrid};
pub use planner::SemanticPath;
pub use time::Timestamp;
