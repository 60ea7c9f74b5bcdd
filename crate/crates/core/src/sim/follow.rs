//! Pure-pursuit path tracker.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{step, VelocityCommand, WorldState, V_MAX, W_MAX};
use crate::geometry::{normalize_angle, Point2, Pose2D};
use crate::gridplan::MetricPath;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FollowerGains {
    /// Distance ahead along the path that the tracker steers towards, m.
    pub lookahead: f64,
    /// Distance to the last point that counts as arrival, m.
    pub goal_tolerance: f64,
    /// Heading error above which the robot turns on the spot, rad.
    pub turn_in_place: f64,
    /// Angular gain when turning on the spot, 1/s.
    pub k_turn: f64,
    /// Linear speed per metre of remaining distance near the goal, 1/s.
    pub k_approach: f64,
    /// Time without progress before giving up, s.
    pub stuck_timeout: f64,
}

impl Default for FollowerGains {
    fn default() -> Self {
        FollowerGains {
            lookahead: 0.5,
            goal_tolerance: 0.15,
            turn_in_place: 1.0,
            k_turn: 2.0,
            k_approach: 1.0,
            stuck_timeout: 10.0,
        }
    }
}

/// Remaining distance must shrink by this much to count as progress, m.
const PROGRESS_EPS: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FollowStatus {
    Drive(VelocityCommand),
    Arrived,
    Stuck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathFollower {
    points: Vec<Point2>,
    /// Arc length from the start to each point.
    arc: Vec<f64>,
    gains: FollowerGains,
    /// Segment the robot was last projected onto.
    segment: usize,
    best_remaining: f64,
    last_progress: f64,
}

impl PathFollower {
    /// # Panics
    /// If the path has no points.
    pub fn new(path: &MetricPath, gains: FollowerGains, now: f64) -> Self {
        assert!(!path.points.is_empty(), "cannot follow an empty path");
        let mut arc = Vec::with_capacity(path.points.len());
        let mut s = 0.0;
        arc.push(0.0);
        for w in path.points.windows(2) {
            s += w[0].distance(&w[1]);
            arc.push(s);
        }
        PathFollower {
            points: path.points.clone(),
            arc,
            gains,
            segment: 0,
            best_remaining: f64::INFINITY,
            last_progress: now,
        }
    }

    pub fn gains(&self) -> &FollowerGains {
        &self.gains
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Index of the path point the robot is heading for.
    pub fn waypoint_index(&self) -> usize {
        (self.segment + 1).min(self.points.len() - 1)
    }

    fn goal(&self) -> Point2 {
        self.points[self.points.len() - 1]
    }

    fn total(&self) -> f64 {
        self.arc[self.arc.len() - 1]
    }

    /// Projects `p` onto the path from the current segment onwards and
    /// returns the arc length of the projection.
    fn project(&mut self, p: &Point2) -> f64 {
        if self.points.len() == 1 {
            return 0.0;
        }
        let mut best = (f64::INFINITY, self.segment, self.arc[self.segment]);
        // look a few metres ahead only, so a path that doubles back is not short-circuited
        let horizon = self.arc[self.segment] + 2.0;
        for k in self.segment..self.points.len() - 1 {
            if self.arc[k] > horizon {
                break;
            }
            let (a, b) = (self.points[k], self.points[k + 1]);
            let ab = b - a;
            let len2 = ab.x * ab.x + ab.y * ab.y;
            let t = if len2 > 0.0 {
                (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let q = a + ab * t;
            let d = q.distance(p);
            if d < best.0 {
                best = (d, k, self.arc[k] + t * len2.sqrt());
            }
        }
        self.segment = best.1;
        best.2
    }

    /// Point at arc length `s`, clamped to the path ends.
    fn point_at(&self, s: f64) -> Point2 {
        if s >= self.total() {
            return self.goal();
        }
        let k = self.arc.partition_point(|a| *a <= s).saturating_sub(1);
        let seg = self.arc[k + 1] - self.arc[k];
        let t = if seg > 0.0 { (s - self.arc[k]) / seg } else { 0.0 };
        self.points[k] + (self.points[k + 1] - self.points[k]) * t
    }

    /// Next command for a robot believed to be at `pose` at time `now`.
    pub fn command(&mut self, pose: &Pose2D, now: f64) -> FollowStatus {
        let here = pose.position();
        let to_goal = here.distance(&self.goal());
        let s = self.project(&here);
        if to_goal <= self.gains.goal_tolerance && self.segment + 2 >= self.points.len() {
            return FollowStatus::Arrived;
        }
        let remaining = (self.total() - s) + here.distance(&self.point_at(s));
        if remaining < self.best_remaining - PROGRESS_EPS {
            self.best_remaining = remaining;
            self.last_progress = now;
        } else if now - self.last_progress > self.gains.stuck_timeout {
            return FollowStatus::Stuck;
        }

        let target = self.point_at(s + self.gains.lookahead);
        let d = target - here;
        let alpha = normalize_angle(d.y.atan2(d.x) - pose.theta);
        if alpha.abs() > self.gains.turn_in_place {
            return FollowStatus::Drive(VelocityCommand::new(0.0, self.gains.k_turn * alpha));
        }
        let v = (self.gains.k_approach * remaining).min(V_MAX) * alpha.cos();
        let dist = d.norm().max(1e-6);
        // pure pursuit: curvature of the arc through the target point
        let curvature = 2.0 * alpha.sin() / dist;
        let mut w = v * curvature;
        let mut v = v;
        if w.abs() > W_MAX {
            v *= W_MAX / w.abs();
            w = w.signum() * W_MAX;
        }
        FollowStatus::Drive(VelocityCommand::new(v, w))
    }
}

/// Result of driving a path open loop on the true pose.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowOutcome {
    pub commands: Vec<VelocityCommand>,
    pub status: FollowStatus,
    pub collisions: usize,
}

/// Drives `world` along `path` with perfect pose knowledge until arrival,
/// stuck detection or `max_time` seconds.
pub fn follow_path(
    world: &mut WorldState,
    path: &MetricPath,
    gains: FollowerGains,
    dt: f64,
    max_time: f64,
) -> FollowOutcome {
    let mut follower = PathFollower::new(path, gains, world.time);
    let mut commands = Vec::new();
    let mut collisions = 0;
    let end = world.time + max_time;
    loop {
        let status = follower.command(&world.true_pose, world.time);
        let cmd = match status {
            FollowStatus::Drive(cmd) => cmd,
            other => {
                return FollowOutcome {
                    commands,
                    status: other,
                    collisions,
                }
            }
        };
        if world.time >= end {
            return FollowOutcome {
                commands,
                status: FollowStatus::Stuck,
                collisions,
            };
        }
        step(world, &cmd, dt);
        collisions += usize::from(world.collision);
        commands.push(cmd);
    }
}
