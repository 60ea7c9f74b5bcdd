//! Semantic Monte Carlo localization.

pub mod beam;
pub mod filter;
pub mod motion;
pub mod raycast;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use beam::{beam_likelihood, BeamModelParams};
pub use filter::{
    beam_stride_for, estimate_pose, measurement_update, motion_update, resample, systematic_resample,
    LocalizationError, Particle, ParticleSet, PoseEstimate, UpdateReport,
};
pub use motion::{MotionNoise, OdometryDelta};
pub use raycast::{cast_ray, raycast_semantic, RaycastError};

/// A planar lidar sweep. Beam `k` points at `angle_min + k * angle_increment`
/// relative to the robot heading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserScan {
    pub angle_min: f64,
    pub angle_increment: f64,
    pub ranges: Vec<f64>,
    pub range_max: f64,
}

impl LaserScan {
    pub fn beam_angle(&self, k: usize) -> f64 {
        self.angle_min + k as f64 * self.angle_increment
    }

    /// Every range in (0, range_max] and at least one beam.
    pub fn is_valid(&self) -> bool {
        !self.ranges.is_empty() && self.range_max > 0.0 && self.ranges.iter().all(|r| *r > 0.0 && *r <= self.range_max)
    }
}
