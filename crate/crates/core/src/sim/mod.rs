//! Desk-scale 2-D world: unicycle kinematics, noisy odometry, semantic lidar
//! and UWB ranging, plus a path tracker and a closed-loop mission runner.

mod follow;
mod mission;

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Point3, Pose2D};
use crate::grid::{ClassMask, SemanticOccupancyGrid};
use crate::localization::motion::gaussian;
use crate::localization::raycast::bresenham;
use crate::localization::{cast_ray, LaserScan, MotionNoise, OdometryDelta};
use crate::uwb::RangeObservation;

pub use follow::{follow_path, FollowOutcome, FollowStatus, FollowerGains, PathFollower};
pub use mission::{LegRecord, MissionConfig, MissionError, MissionRunner, MissionStatus, TickEvent};

/// Linear speed limit, m/s.
pub const V_MAX: f64 = 0.5;
/// Angular speed limit, rad/s.
pub const W_MAX: f64 = 1.0;
/// Longest accepted integration step, s.
pub const MAX_DT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub id: String,
    pub position: Point3,
}

/// Ground truth of the simulated world.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub true_pose: Pose2D,
    /// Ground-truth grid; may contain obstacles the building model lacks.
    pub grid: SemanticOccupancyGrid,
    pub anchors: Vec<Anchor>,
    /// Simulation time, s.
    pub time: f64,
    /// Set by the last [`step`] when the motion was blocked.
    pub collision: bool,
}

impl WorldState {
    pub fn new(grid: SemanticOccupancyGrid, pose: Pose2D, anchors: Vec<Anchor>) -> Self {
        WorldState {
            true_pose: pose,
            grid,
            anchors,
            time: 0.0,
            collision: false,
        }
    }

    /// True when `p` is inside the grid and its cell is not occupied.
    pub fn is_free(&self, p: &Point2) -> bool {
        self.grid.world_to_cell(p).is_some_and(|c| !self.grid.is_occupied(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    /// m/s
    pub linear: f64,
    /// rad/s
    pub angular: f64,
}

impl VelocityCommand {
    pub const STOP: VelocityCommand = VelocityCommand {
        linear: 0.0,
        angular: 0.0,
    };

    /// A command clamped to the speed limits.
    pub fn new(linear: f64, angular: f64) -> Self {
        VelocityCommand {
            linear: linear.clamp(-V_MAX, V_MAX),
            angular: angular.clamp(-W_MAX, W_MAX),
        }
    }

    pub fn within_limits(&self) -> bool {
        self.linear.abs() <= V_MAX && self.angular.abs() <= W_MAX
    }
}

/// Integrates the unicycle model exactly over `dt` seconds.
fn integrate(pose: &Pose2D, cmd: &VelocityCommand, dt: f64) -> Pose2D {
    let (v, w) = (cmd.linear, cmd.angular);
    let th = pose.theta;
    if w.abs() < 1e-9 {
        return Pose2D::new(pose.x + v * dt * th.cos(), pose.y + v * dt * th.sin(), th);
    }
    let th1 = th + w * dt;
    Pose2D::new(
        pose.x + v / w * (th1.sin() - th.sin()),
        pose.y - v / w * (th1.cos() - th.cos()),
        th1,
    )
}

/// Advances the world by `dt` seconds under `cmd`.
///
/// The command is integrated as given; speed limits are the controller's
/// business. If any cell between the old and new position is occupied the
/// pose is left unchanged and `collision` is set.
///
/// # Panics
/// If `dt` is not in (0, [`MAX_DT`]].
pub fn step(world: &mut WorldState, cmd: &VelocityCommand, dt: f64) {
    assert!(dt > 0.0 && dt <= MAX_DT, "dt must be in (0, {MAX_DT}], got {dt}");
    let next = integrate(&world.true_pose, cmd, dt);
    world.time += dt;
    let g = &world.grid;
    let (i0, j0) = g.world_to_cell_signed(&world.true_pose.position());
    let (i1, j1) = g.world_to_cell_signed(&next.position());
    let blocked = bresenham(i0, j0, i1, j1)
        .any(|(i, j)| !g.contains_signed(i, j) || g.is_occupied(crate::grid::CellIndex::new(i as usize, j as usize)));
    world.collision = blocked;
    if !blocked {
        world.true_pose = next;
    }
}

/// Lidar geometry and noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    pub beam_count: usize,
    pub angle_min: f64,
    pub angle_increment: f64,
    pub range_max: f64,
    /// Additive Gaussian range noise, m.
    pub sigma: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let beam_count = 180;
        ScanConfig {
            beam_count,
            angle_min: -PI,
            angle_increment: 2.0 * PI / beam_count as f64,
            range_max: 10.0,
            sigma: 0.02,
        }
    }
}

/// Smallest range a scan reports.
const MIN_RANGE: f64 = 1e-3;

/// Simulated lidar sweep from the true pose.
///
/// Each beam is cast on the ground-truth grid with `visible` as the class
/// mask, so cells of undetectable materials let the beam through. Returns at
/// `range_max` stay noiseless; others get Gaussian noise and are clamped
/// into (0, range_max].
///
/// # Panics
/// If the true pose is outside the grid.
pub fn simulate_scan<R: Rng + ?Sized>(
    world: &WorldState,
    config: &ScanConfig,
    visible: &ClassMask,
    rng: &mut R,
) -> LaserScan {
    let pose = world.true_pose;
    let ranges = (0..config.beam_count)
        .map(|k| {
            let angle = pose.theta + config.angle_min + k as f64 * config.angle_increment;
            let z = cast_ray(&world.grid, pose.position(), angle, config.range_max, visible)
                .expect("true pose lies inside the grid");
            if z >= config.range_max {
                config.range_max
            } else {
                (z + gaussian(rng, config.sigma)).clamp(MIN_RANGE, config.range_max)
            }
        })
        .collect();
    LaserScan {
        angle_min: config.angle_min,
        angle_increment: config.angle_increment,
        ranges,
        range_max: config.range_max,
    }
}

/// What a noisy odometer reports for the motion from `prev` to `next`.
pub fn simulate_odometry<R: Rng + ?Sized>(
    prev: &Pose2D,
    next: &Pose2D,
    alphas: MotionNoise,
    rng: &mut R,
) -> OdometryDelta {
    OdometryDelta::between(prev, next, alphas).corrupted(rng)
}

/// One range per anchor from a tag at `tag_height` above the true pose.
pub fn simulate_ranges<R: Rng + ?Sized>(
    world: &WorldState,
    tag_height: f64,
    sigma: f64,
    rng: &mut R,
) -> Vec<RangeObservation> {
    let tag = Point3::new(world.true_pose.x, world.true_pose.y, tag_height);
    world
        .anchors
        .iter()
        .map(|a| RangeObservation {
            t: world.time,
            anchor_id: a.id.clone(),
            robot_position: tag,
            range: (a.position.distance(&tag) + gaussian(rng, sigma)).max(0.0),
        })
        .collect()
}
