//! Class-aware ray casting over the semantic grid.
//!
//! The same routine serves the simulator (ground-truth world, lidar-visible
//! classes) and the localizer (belief map, sensor mask), so an occupied cell
//! whose class is outside the mask can never change a ray's result.

use num_traits::Float;
use thiserror::Error;

use crate::geometry::{Point2, Pose2D};
use crate::grid::{CellIndex, ClassMask, SemanticOccupancyGrid};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RaycastError {
    #[error("pose ({x:.3}, {y:.3}) is outside the grid")]
    OutsideGrid { x: f64, y: f64 },
}

/// Integer Bresenham line from `(x0, y0)` to `(x1, y1)`, both ends inclusive.
pub fn bresenham(x0: i64, y0: i64, x1: i64, y1: i64) -> Bresenham {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    Bresenham {
        x: x0,
        y: y0,
        x1,
        y1,
        dx,
        dy,
        sx: if x0 < x1 { 1 } else { -1 },
        sy: if y0 < y1 { 1 } else { -1 },
        err: dx + dy,
        done: false,
    }
}

#[derive(Debug, Clone)]
pub struct Bresenham {
    x: i64,
    y: i64,
    x1: i64,
    y1: i64,
    dx: i64,
    dy: i64,
    sx: i64,
    sy: i64,
    err: i64,
    done: bool,
}

impl Iterator for Bresenham {
    type Item = (i64, i64);

    fn next(&mut self) -> Option<(i64, i64)> {
        if self.done {
            return None;
        }
        let out = (self.x, self.y);
        if self.x == self.x1 && self.y == self.y1 {
            self.done = true;
            return Some(out);
        }
        let e2 = 2 * self.err;
        if e2 >= self.dy {
            self.err += self.dy;
            self.x += self.sx;
        }
        if e2 <= self.dx {
            self.err += self.dx;
            self.y += self.sy;
        }
        Some(out)
    }
}

/// Casts a ray from `origin` along the world-frame `angle`.
///
/// Returns the distance to the centre of the first cell that is occupied and
/// whose class is in `mask`, or `z_max` when the ray reaches its range limit
/// or leaves the grid first.
pub fn cast_ray(
    grid: &SemanticOccupancyGrid,
    origin: Point2,
    angle: f64,
    z_max: f64,
    mask: &ClassMask,
) -> Result<f64, RaycastError> {
    let (i0, j0) = grid.world_to_cell_signed(&origin);
    if !grid.contains_signed(i0, j0) {
        return Err(RaycastError::OutsideGrid {
            x: origin.x,
            y: origin.y,
        });
    }
    let end = Point2::new(origin.x + z_max * angle.cos(), origin.y + z_max * angle.sin());
    let (i1, j1) = grid.world_to_cell_signed(&end);
    for (i, j) in bresenham(i0, j0, i1, j1) {
        if !grid.contains_signed(i, j) {
            return Ok(z_max);
        }
        let c = CellIndex::new(i as usize, j as usize);
        let cell = grid.cell(c);
        if cell.is_occupied() && mask.contains(cell.class) {
            return Ok(grid.cell_center(c).distance(&origin).min(z_max));
        }
    }
    Ok(z_max)
}

/// Expected range for a beam at `beam_angle` relative to the robot heading.
pub fn raycast_semantic(
    grid: &SemanticOccupancyGrid,
    pose: &Pose2D,
    beam_angle: f64,
    z_max: f64,
    mask: &ClassMask,
) -> Result<f64, RaycastError> {
    cast_ray(grid, pose.position(), pose.theta + beam_angle, z_max, mask)
}
