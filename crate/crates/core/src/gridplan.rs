//! Metric path planning on the occupancy grid.
//!
//! 8-connected A* with unit straight and √2 diagonal steps. A diagonal step
//! needs both orthogonal neighbours free (no corner cutting). Cells within
//! the inflation radius of an occupied cell are treated as blocked.

use alloc::collections::BinaryHeap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::SQRT_2;

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point2, Pose2D};
use crate::grid::{CellIndex, SemanticOccupancyGrid};
use crate::planner::SemanticPath;

/// Safety radius around obstacles, metres.
pub const DEFAULT_INFLATION: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricPath {
    pub points: Vec<Point2>,
    /// Sum of segment lengths, metres.
    pub length: f64,
}

impl MetricPath {
    pub fn from_points(points: Vec<Point2>) -> Self {
        let length = points.windows(2).map(|w| w[0].distance(&w[1])).sum();
        MetricPath { points, length }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridPlanError {
    #[error("start ({x:.2}, {y:.2}) is outside the grid")]
    StartOutside { x: f64, y: f64 },
    #[error("goal ({x:.2}, {y:.2}) is outside the grid")]
    GoalOutside { x: f64, y: f64 },
    #[error("start ({x:.2}, {y:.2}) is occupied after inflation")]
    StartBlocked { x: f64, y: f64 },
    #[error("goal ({x:.2}, {y:.2}) is occupied after inflation")]
    GoalBlocked { x: f64, y: f64 },
    #[error("no path between ({sx:.2}, {sy:.2}) and ({gx:.2}, {gy:.2})")]
    NoPath { sx: f64, sy: f64, gx: f64, gy: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("waypoint {index} ({id}): {source}")]
pub struct StitchError {
    pub index: usize,
    pub id: String,
    pub source: GridPlanError,
}

/// Traversability of each cell after inflating obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct InflatedGrid {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
}

impl InflatedGrid {
    pub fn new(grid: &SemanticOccupancyGrid, inflation: f64) -> Self {
        let (w, h) = (grid.width(), grid.height());
        let mut blocked = vec![false; w * h];
        let r = (inflation.max(0.0) / grid.resolution()).max(0.0);
        let reach = r.floor() as i64;
        let r2 = r * r + 1e-6;
        let offsets: Vec<(i64, i64)> = (-reach..=reach)
            .flat_map(|dj| (-reach..=reach).map(move |di| (di, dj)))
            .filter(|(di, dj)| (di * di + dj * dj) as f64 <= r2)
            .collect();
        for c in grid.indices() {
            if !grid.is_occupied(c) {
                continue;
            }
            for (di, dj) in &offsets {
                let (i, j) = (c.i as i64 + di, c.j as i64 + dj);
                if i >= 0 && j >= 0 && (i as usize) < w && (j as usize) < h {
                    blocked[j as usize * w + i as usize] = true;
                }
            }
        }
        InflatedGrid {
            width: w,
            height: h,
            blocked,
        }
    }

    pub fn is_blocked(&self, c: CellIndex) -> bool {
        self.blocked[c.j * self.width + c.i]
    }

    fn free_signed(&self, i: i64, j: i64) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.width
            && (j as usize) < self.height
            && !self.blocked[j as usize * self.width + i as usize]
    }

    /// Free neighbours of a cell with their step type (true when diagonal).
    pub fn neighbors(&self, c: CellIndex) -> impl Iterator<Item = (CellIndex, bool)> + '_ {
        const STEPS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        let (i, j) = (c.i as i64, c.j as i64);
        STEPS.iter().filter_map(move |&(di, dj)| {
            let (ni, nj) = (i + di, j + dj);
            if !self.free_signed(ni, nj) {
                return None;
            }
            let diagonal = di != 0 && dj != 0;
            if diagonal && !(self.free_signed(i + di, j) && self.free_signed(i, j + dj)) {
                return None;
            }
            Some((CellIndex::new(ni as usize, nj as usize), diagonal))
        })
    }
}

/// Path cost as counts of straight and diagonal steps; compared by value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepCount {
    pub straight: u32,
    pub diagonal: u32,
}

impl StepCount {
    pub fn value(&self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * SQRT_2
    }

    fn step(self, diagonal: bool) -> Self {
        if diagonal {
            StepCount {
                diagonal: self.diagonal + 1,
                ..self
            }
        } else {
            StepCount {
                straight: self.straight + 1,
                ..self
            }
        }
    }

    /// Step counts of a cell-centre path on a grid with the given resolution.
    pub fn of_points(points: &[Point2], resolution: f64) -> Self {
        let mut s = StepCount::default();
        for w in points.windows(2) {
            let dx = ((w[1].x - w[0].x) / resolution).round() as i64;
            let dy = ((w[1].y - w[0].y) / resolution).round() as i64;
            s = s.step(dx != 0 && dy != 0);
        }
        s
    }
}

#[derive(Debug, Clone, Copy)]
struct Open {
    f: f64,
    h: f64,
    idx: usize,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// A* between two world points on a pre-inflated grid.
pub fn astar_on(
    grid: &SemanticOccupancyGrid,
    inflated: &InflatedGrid,
    start: Point2,
    goal: Point2,
) -> Result<MetricPath, GridPlanError> {
    let s = grid
        .world_to_cell(&start)
        .ok_or(GridPlanError::StartOutside { x: start.x, y: start.y })?;
    let g = grid
        .world_to_cell(&goal)
        .ok_or(GridPlanError::GoalOutside { x: goal.x, y: goal.y })?;
    if inflated.is_blocked(s) {
        return Err(GridPlanError::StartBlocked { x: start.x, y: start.y });
    }
    if inflated.is_blocked(g) {
        return Err(GridPlanError::GoalBlocked { x: goal.x, y: goal.y });
    }

    let n = grid.len();
    let heuristic = |c: CellIndex| {
        let dx = c.i as f64 - g.i as f64;
        let dy = c.j as f64 - g.j as f64;
        dx.hypot(dy)
    };
    let mut cost: Vec<Option<StepCount>> = vec![None; n];
    let mut parent: Vec<usize> = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let si = grid.flat_index(s);
    let gi = grid.flat_index(g);
    cost[si] = Some(StepCount::default());
    let h0 = heuristic(s);
    open.push(Open { f: h0, h: h0, idx: si });

    while let Some(Open { idx, .. }) = open.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        if idx == gi {
            break;
        }
        let here = grid.index_of(idx);
        let base = cost[idx].expect("opened cells have a cost");
        for (next, diagonal) in inflated.neighbors(here) {
            let ni = grid.flat_index(next);
            if closed[ni] {
                continue;
            }
            let candidate = base.step(diagonal);
            let better = match cost[ni] {
                None => true,
                Some(old) => candidate.value() < old.value(),
            };
            if better {
                cost[ni] = Some(candidate);
                parent[ni] = idx;
                let h = heuristic(next);
                open.push(Open {
                    f: candidate.value() + h,
                    h,
                    idx: ni,
                });
            }
        }
    }

    if !closed[gi] {
        return Err(GridPlanError::NoPath {
            sx: start.x,
            sy: start.y,
            gx: goal.x,
            gy: goal.y,
        });
    }
    let mut cells = vec![gi];
    let mut at = gi;
    while at != si {
        at = parent[at];
        cells.push(at);
    }
    cells.reverse();
    Ok(MetricPath::from_points(
        cells.into_iter().map(|i| grid.cell_center(grid.index_of(i))).collect(),
    ))
}

/// Shortest 8-connected path avoiding cells within `inflation` metres of an obstacle.
pub fn astar(
    grid: &SemanticOccupancyGrid,
    start: Point2,
    goal: Point2,
    inflation: f64,
) -> Result<MetricPath, GridPlanError> {
    astar_on(grid, &InflatedGrid::new(grid, inflation), start, goal)
}

/// Joins A* segments from the pose through every waypoint of a semantic path.
pub fn stitch(
    grid: &SemanticOccupancyGrid,
    pose: &Pose2D,
    path: &SemanticPath,
    inflation: f64,
) -> Result<MetricPath, StitchError> {
    let inflated = InflatedGrid::new(grid, inflation);
    stitch_waypoints(grid, &inflated, pose.position(), &path.x_y_path, |k| {
        path.semantic_path.get(k).cloned().unwrap_or_default()
    })
}

/// Joins A* segments from `start` through `waypoints`; `name` labels errors.
pub fn stitch_waypoints<F: Fn(usize) -> String>(
    grid: &SemanticOccupancyGrid,
    inflated: &InflatedGrid,
    start: Point2,
    waypoints: &[Point2],
    name: F,
) -> Result<MetricPath, StitchError> {
    let mut points: Vec<Point2> = Vec::new();
    let mut from = start;
    for (k, wp) in waypoints.iter().enumerate() {
        let seg = astar_on(grid, inflated, from, *wp).map_err(|source| StitchError {
            index: k,
            id: name(k),
            source,
        })?;
        for p in seg.points {
            if points.last() != Some(&p) {
                points.push(p);
            }
        }
        from = *wp;
    }
    if points.len() <= 1 {
        return Ok(MetricPath::default());
    }
    Ok(MetricPath::from_points(points))
}
