//! Closed-loop mission execution: plan a room sequence, stitch it into a
//! metric path on the belief map, follow it on the particle-filter estimate
//! and fold scans back into the map.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{simulate_odometry, simulate_ranges, simulate_scan, step, Anchor, ScanConfig, VelocityCommand, WorldState};
use super::{FollowStatus, FollowerGains, PathFollower};
use crate::building::{rasterize, BuildingGraph, RasterError, WeightConfig};
use crate::geometry::{Point2, Point3, Pose2D};
use crate::grid::{CellIndex, ClassMask, SemanticOccupancyGrid};
use crate::gridplan::{astar_on, GridPlanError, InflatedGrid, MetricPath, DEFAULT_INFLATION};
use crate::localization::motion::gaussian;
use crate::localization::{
    beam_stride_for, estimate_pose, measurement_update, motion_update, resample, BeamModelParams, LocalizationError,
    MotionNoise, OdometryDelta, ParticleSet,
};
use crate::merge::{merge_scan, InverseSensorParams};
use crate::planner::{plan, replan_after_visit, PlanError, SemanticPath};
use crate::time::Timestamp;
use crate::uwb::{RangeObservation, DEFAULT_TAG_HEIGHT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MissionConfig {
    /// Grid resolution, m.
    pub resolution: f64,
    pub inflation: f64,
    /// Fixed tick length, s.
    pub dt: f64,
    pub particles: usize,
    /// Spread of the initial particle cloud around the given pose.
    pub initial_sigma_xy: f64,
    pub initial_sigma_theta: f64,
    pub scan: ScanConfig,
    pub beam: BeamModelParams,
    /// Beams used per measurement update; the scan is subsampled evenly.
    pub max_beams: usize,
    /// Noise of the simulated odometer.
    pub odometry_noise: MotionNoise,
    /// Noise the filter assumes.
    pub filter_noise: MotionNoise,
    /// Ticks between merges of a scan into the belief map; 0 disables merging.
    pub merge_interval: usize,
    pub inverse_sensor: InverseSensorParams,
    pub uwb_sigma: f64,
    pub tag_height: f64,
    pub gains: FollowerGains,
    pub weights: WeightConfig,
    /// Wall-clock time of tick 0, used for scan ages.
    pub start_time: Timestamp,
    pub max_ticks: u64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        MissionConfig {
            resolution: 0.1,
            inflation: DEFAULT_INFLATION,
            dt: 0.1,
            particles: 300,
            initial_sigma_xy: 0.2,
            initial_sigma_theta: 0.1,
            scan: ScanConfig::default(),
            beam: BeamModelParams::default(),
            max_beams: 30,
            odometry_noise: MotionNoise {
                a1: 0.02,
                a2: 0.005,
                a3: 0.02,
                a4: 0.005,
            },
            filter_noise: MotionNoise {
                a1: 0.05,
                a2: 0.01,
                a3: 0.05,
                a4: 0.01,
            },
            merge_interval: 10,
            inverse_sensor: InverseSensorParams::default(),
            uwb_sigma: 0.1,
            tag_height: DEFAULT_TAG_HEIGHT,
            gains: FollowerGains::default(),
            weights: WeightConfig::default(),
            start_time: Timestamp::from_secs(0.0),
            max_ticks: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MissionError {
    #[error("rasterizing the building: {0}")]
    Raster(#[from] RasterError),
    #[error("ground-truth grid does not share the belief map's frame")]
    FrameMismatch,
    #[error("initial pose ({x:.2}, {y:.2}) is not in free space")]
    InitialPoseBlocked { x: f64, y: f64 },
    #[error("estimated pose ({x:.2}, {y:.2}) is not inside any room")]
    OutsideRooms { x: f64, y: f64 },
    #[error("planning leg {leg}: {source}")]
    Plan { leg: usize, source: PlanError },
    #[error("metric path for leg {leg}: {source}")]
    Grid { leg: usize, source: GridPlanError },
    #[error("leg {leg} made no progress")]
    Stuck { leg: usize },
    #[error("mission exceeded {0} ticks")]
    Timeout(u64),
    #[error(transparent)]
    Localization(#[from] LocalizationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissionStatus {
    Running,
    Succeeded,
    Failed,
}

/// One leg of a mission: the plan towards one goal room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegRecord {
    pub goal: String,
    pub start_room: String,
    pub started_at: f64,
    pub finished_at: Option<f64>,
    pub plan: SemanticPath,
    pub metric_path: MetricPath,
    /// Rooms the estimate passed through, in order.
    pub visited: Vec<String>,
}

/// Telemetry snapshot emitted once per tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickEvent {
    pub tick: u64,
    /// Simulation time, s.
    pub t: f64,
    pub leg: usize,
    pub goal: Option<String>,
    pub true_pose: Pose2D,
    pub estimate: Pose2D,
    pub position_error: f64,
    pub particle_spread: f64,
    pub waypoint_index: usize,
    pub command: VelocityCommand,
    pub collision: bool,
    /// The current leg's plan carries warnings.
    pub warning: bool,
    pub diverged: bool,
    pub resampled: bool,
    pub map_version: u64,
    pub status: MissionStatus,
}

struct ActiveLeg {
    follower: PathFollower,
    /// Semantic waypoints and, for each, the index of its last metric point.
    waypoints: Vec<(Point2, usize)>,
}

/// Single-owner simulation loop for a list of goal rooms.
pub struct MissionRunner<R> {
    cfg: MissionConfig,
    graph: BuildingGraph,
    world: WorldState,
    belief: SemanticOccupancyGrid,
    inflated: InflatedGrid,
    lidar: ClassMask,
    beam: BeamModelParams,
    inverse: InverseSensorParams,
    particles: ParticleSet,
    estimate: Pose2D,
    goals: Vec<String>,
    leg: usize,
    active: Option<ActiveLeg>,
    legs: Vec<LegRecord>,
    ranging: Vec<RangeObservation>,
    tick: u64,
    map_version: u64,
    status: MissionStatus,
    error: Option<MissionError>,
    rng: R,
}

impl<R: Rng> MissionRunner<R> {
    /// Sets up a mission. `truth` is the ground-truth grid and must share the
    /// frame of the building's rasterization; `None` uses the rasterization.
    pub fn new(
        graph: BuildingGraph,
        truth: Option<SemanticOccupancyGrid>,
        initial_pose: Pose2D,
        anchors: Vec<Anchor>,
        goals: Vec<String>,
        cfg: MissionConfig,
        mut rng: R,
    ) -> Result<Self, MissionError> {
        let belief = rasterize(&graph, cfg.resolution)?;
        let truth = truth.unwrap_or_else(|| belief.clone());
        if truth.width() != belief.width()
            || truth.height() != belief.height()
            || truth.origin() != belief.origin()
            || truth.resolution() != belief.resolution()
        {
            return Err(MissionError::FrameMismatch);
        }
        let world = WorldState::new(truth, initial_pose, anchors);
        if !world.is_free(&initial_pose.position()) {
            return Err(MissionError::InitialPoseBlocked {
                x: initial_pose.x,
                y: initial_pose.y,
            });
        }
        let lidar = graph.lidar_mask();
        let particles = ParticleSet::from_poses((0..cfg.particles.max(1)).map(|_| {
            Pose2D::new(
                initial_pose.x + gaussian(&mut rng, cfg.initial_sigma_xy),
                initial_pose.y + gaussian(&mut rng, cfg.initial_sigma_xy),
                initial_pose.theta + gaussian(&mut rng, cfg.initial_sigma_theta),
            )
        }));
        let estimate = estimate_pose(&particles)?.pose;
        Ok(MissionRunner {
            inflated: InflatedGrid::new(&belief, cfg.inflation),
            beam: cfg.beam.with_mask(lidar),
            inverse: cfg.inverse_sensor.with_mask(lidar),
            cfg,
            graph,
            world,
            belief,
            lidar,
            particles,
            estimate,
            goals,
            leg: 0,
            active: None,
            legs: Vec::new(),
            ranging: Vec::new(),
            tick: 0,
            map_version: 0,
            status: MissionStatus::Running,
            error: None,
            rng,
        })
    }

    /// Replaces the initial particle cloud, e.g. to start from a wrong guess.
    pub fn set_particles(&mut self, particles: ParticleSet) -> Result<(), MissionError> {
        self.estimate = estimate_pose(&particles)?.pose;
        self.particles = particles;
        Ok(())
    }

    pub fn status(&self) -> MissionStatus {
        self.status
    }

    pub fn error(&self) -> Option<&MissionError> {
        self.error.as_ref()
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn belief(&self) -> &SemanticOccupancyGrid {
        &self.belief
    }

    pub fn graph(&self) -> &BuildingGraph {
        &self.graph
    }

    pub fn particles(&self) -> &ParticleSet {
        &self.particles
    }

    pub fn estimate(&self) -> Pose2D {
        self.estimate
    }

    pub fn legs(&self) -> &[LegRecord] {
        &self.legs
    }

    pub fn ranging(&self) -> &[RangeObservation] {
        &self.ranging
    }

    pub fn map_version(&self) -> u64 {
        self.map_version
    }

    /// Current wall-clock time.
    pub fn now(&self) -> Timestamp {
        self.cfg.start_time.plus_secs(self.world.time)
    }

    fn fail(&mut self, e: MissionError) -> VelocityCommand {
        self.status = MissionStatus::Failed;
        self.error = Some(e);
        self.active = None;
        VelocityCommand::STOP
    }

    fn current_room(&self) -> Option<String> {
        self.graph.room_at(&self.estimate.position()).map(|r| r.room_id.clone())
    }

    /// Nearest traversable cell centre to `p` within one metre, or `p` itself.
    fn nearest_free(&self, p: Point2) -> Point2 {
        let g = &self.belief;
        let Some(c) = g.world_to_cell(&p) else { return p };
        if !self.inflated.is_blocked(c) {
            return p;
        }
        let reach = (1.0 / g.resolution()).ceil() as i64;
        let mut best: Option<(f64, Point2)> = None;
        for dj in -reach..=reach {
            for di in -reach..=reach {
                let (i, j) = (c.i as i64 + di, c.j as i64 + dj);
                if !g.contains_signed(i, j) {
                    continue;
                }
                let n = CellIndex::new(i as usize, j as usize);
                if self.inflated.is_blocked(n) {
                    continue;
                }
                let q = g.cell_center(n);
                let d = q.distance(&p);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, q));
                }
            }
        }
        best.map_or(p, |(_, q)| q)
    }

    /// A* from `start` through `waypoints` on the belief map.
    fn stitch_from(
        &self,
        start: Point2,
        waypoints: &[Point2],
    ) -> Result<(MetricPath, Vec<(Point2, usize)>), GridPlanError> {
        let mut points: Vec<Point2> = Vec::new();
        let mut ends = Vec::with_capacity(waypoints.len());
        let mut from = self.nearest_free(start);
        for wp in waypoints {
            let seg = astar_on(&self.belief, &self.inflated, from, *wp)?;
            for p in seg.points {
                if points.last() != Some(&p) {
                    points.push(p);
                }
            }
            ends.push((*wp, points.len().saturating_sub(1)));
            from = *wp;
        }
        Ok((MetricPath::from_points(points), ends))
    }

    fn start_leg(&mut self) -> Result<(), MissionError> {
        let leg = self.leg;
        let here = self.estimate.position();
        let start_room = self
            .current_room()
            .ok_or(MissionError::OutsideRooms { x: here.x, y: here.y })?;
        let goal = self.goals[leg].clone();
        let path = plan(&self.graph, &start_room, &goal, &self.cfg.weights, self.now())
            .map_err(|source| MissionError::Plan { leg, source })?;
        let (metric, waypoints) = self
            .stitch_from(here, &path.x_y_path)
            .map_err(|source| MissionError::Grid { leg, source })?;
        self.legs.push(LegRecord {
            goal,
            start_room: start_room.clone(),
            started_at: self.world.time,
            finished_at: None,
            plan: path,
            metric_path: metric.clone(),
            visited: alloc::vec![start_room],
        });
        let follower_path = if metric.is_empty() {
            MetricPath::from_points(alloc::vec![here])
        } else {
            metric
        };
        self.active = Some(ActiveLeg {
            follower: PathFollower::new(&follower_path, self.cfg.gains, self.world.time),
            waypoints,
        });
        Ok(())
    }

    fn finish_leg(&mut self) -> Result<(), MissionError> {
        let now = self.now();
        let record = self.legs.last_mut().expect("an active leg has a record");
        record.finished_at = Some(self.world.time);
        self.graph = replan_after_visit(&self.graph, &record.visited, now)
            .map_err(|source| MissionError::Plan { leg: self.leg, source })?;
        self.active = None;
        self.leg += 1;
        Ok(())
    }

    /// Decides this tick's command, moving between legs as needed.
    fn next_command(&mut self) -> VelocityCommand {
        // a leg can finish and the next start within one tick
        for _ in 0..=self.goals.len() {
            if self.active.is_none() {
                if self.leg >= self.goals.len() {
                    self.status = MissionStatus::Succeeded;
                    return VelocityCommand::STOP;
                }
                if let Err(e) = self.start_leg() {
                    return self.fail(e);
                }
            }
            let time = self.world.time;
            let estimate = self.estimate;
            let active = self.active.as_mut().expect("leg was just started");
            match active.follower.command(&estimate, time) {
                FollowStatus::Drive(cmd) => return cmd,
                FollowStatus::Stuck => {
                    let leg = self.leg;
                    return self.fail(MissionError::Stuck { leg });
                }
                FollowStatus::Arrived => {
                    if let Err(e) = self.finish_leg() {
                        return self.fail(e);
                    }
                }
            }
        }
        VelocityCommand::STOP
    }

    /// Re-stitches the active leg if the merged map now blocks its path.
    fn repair_path(&mut self) {
        let Some(active) = &self.active else { return };
        let from = active.follower.waypoint_index();
        let blocked = active.follower.points()[from..]
            .iter()
            .any(|p| self.belief.world_to_cell(p).is_none_or(|c| self.inflated.is_blocked(c)));
        if !blocked {
            return;
        }
        let remaining: Vec<Point2> = active
            .waypoints
            .iter()
            .filter(|(_, end)| *end >= from)
            .map(|(p, _)| *p)
            .collect();
        // keep the old path if the repair fails; stuck detection has the final word
        if let Ok((metric, waypoints)) = self.stitch_from(self.estimate.position(), &remaining) {
            if !metric.is_empty() {
                let follower = PathFollower::new(&metric, self.cfg.gains, self.world.time);
                if let Some(record) = self.legs.last_mut() {
                    record.metric_path = metric;
                }
                self.active = Some(ActiveLeg { follower, waypoints });
            }
        }
    }

    /// Advances the simulation by one tick. Returns `None` once the mission
    /// has ended and its final tick has been reported.
    pub fn tick(&mut self) -> Option<TickEvent> {
        if self.status != MissionStatus::Running {
            return None;
        }
        if self.tick >= self.cfg.max_ticks {
            let limit = self.cfg.max_ticks;
            self.fail(MissionError::Timeout(limit));
            return None;
        }
        let cmd = self.next_command();

        let prev = self.world.true_pose;
        step(&mut self.world, &cmd, self.cfg.dt);
        let odom = simulate_odometry(&prev, &self.world.true_pose, self.cfg.odometry_noise, &mut self.rng);
        let belief_odom = OdometryDelta {
            alphas: self.cfg.filter_noise,
            ..odom
        };
        motion_update(&mut self.particles, &belief_odom, &mut self.rng);

        let scan = simulate_scan(&self.world, &self.cfg.scan, &self.lidar, &mut self.rng);
        let mut diverged = false;
        let mut resampled = false;
        // a robot standing still learns nothing new from the same view
        if !odom.is_zero() {
            let stride = beam_stride_for(scan.ranges.len(), self.cfg.max_beams);
            match measurement_update(
                &mut self.particles,
                &scan,
                &self.belief,
                &self.beam,
                stride,
                &mut self.rng,
            ) {
                Ok(report) => diverged = report.diverged,
                Err(e) => {
                    self.fail(e.into());
                }
            }
            resampled = resample(&mut self.particles, &mut self.rng);
        }
        if let Ok(e) = estimate_pose(&self.particles) {
            self.estimate = e.pose;
        }

        for mut obs in simulate_ranges(&self.world, self.cfg.tag_height, self.cfg.uwb_sigma, &mut self.rng) {
            // the robot only knows where it believes it is
            obs.robot_position = Point3::new(self.estimate.x, self.estimate.y, self.cfg.tag_height);
            self.ranging.push(obs);
        }

        self.tick += 1;
        if self.cfg.merge_interval > 0
            && self.tick.is_multiple_of(self.cfg.merge_interval as u64)
            && merge_scan(&mut self.belief, &self.estimate, &scan, &self.inverse).is_ok()
        {
            self.map_version += 1;
            self.inflated = InflatedGrid::new(&self.belief, self.cfg.inflation);
            self.repair_path();
        }

        if let Some(room) = self.current_room() {
            if let Some(record) = self.legs.last_mut().filter(|r| r.finished_at.is_none()) {
                if record.visited.last() != Some(&room) {
                    record.visited.push(room);
                }
            }
        }

        let truth = self.world.true_pose;
        Some(TickEvent {
            tick: self.tick,
            t: self.world.time,
            leg: self.leg,
            goal: self.goals.get(self.leg).cloned(),
            true_pose: truth,
            estimate: self.estimate,
            position_error: truth.position().distance(&self.estimate.position()),
            particle_spread: self.particles.position_spread(),
            waypoint_index: self.active.as_ref().map_or(0, |a| a.follower.waypoint_index()),
            command: cmd,
            collision: self.world.collision,
            warning: self
                .legs
                .last()
                .is_some_and(|l| l.finished_at.is_none() && !l.plan.warnings.is_empty()),
            diverged,
            resampled,
            map_version: self.map_version,
            status: self.status,
        })
    }

    /// Runs until the mission ends, handing every event to `sink`.
    pub fn run<F: FnMut(&TickEvent)>(&mut self, mut sink: F) -> MissionStatus {
        while let Some(event) = self.tick() {
            sink(&event);
        }
        self.status
    }
}
