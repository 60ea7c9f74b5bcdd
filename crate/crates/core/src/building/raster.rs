//! Rasterization of wall geometry into a semantic occupancy grid.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;
use thiserror::Error;

use super::BuildingGraph;
use crate::geometry::Point2;
use crate::grid::{CellIndex, ClassId, SemanticOccupancyGrid, P_FREE_PRIOR, P_OCCUPIED_PRIOR};

/// Clear width of a standard door, metres.
pub const DEFAULT_DOOR_WIDTH: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RasterError {
    #[error("resolution must be positive and finite, got {0}")]
    InvalidResolution(f64),
    #[error("door {door:?} ({width} m) is narrower than one {resolution} m cell; its gap would vanish")]
    DoorGapVanishes { door: String, width: f64, resolution: f64 },
}

/// Cells crossed by the segment `a`-`b`, in traversal order, as signed
/// indices of a grid with the given origin and resolution.
pub fn segment_cells(origin: Point2, resolution: f64, a: Point2, b: Point2) -> Vec<(i64, i64)> {
    let u0 = (a - origin) * (1.0 / resolution);
    let u1 = (b - origin) * (1.0 / resolution);
    let (mut i, mut j) = (u0.x.floor() as i64, u0.y.floor() as i64);
    let (i_end, j_end) = (u1.x.floor() as i64, u1.y.floor() as i64);
    let d = u1 - u0;

    let axis = |start: f64, cell: i64, delta: f64| -> (i64, f64, f64) {
        if delta > 0.0 {
            (1, ((cell + 1) as f64 - start) / delta, 1.0 / delta)
        } else if delta < 0.0 {
            (-1, (start - cell as f64) / -delta, -1.0 / delta)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        }
    };
    let (step_i, mut t_max_i, t_delta_i) = axis(u0.x, i, d.x);
    let (step_j, mut t_max_j, t_delta_j) = axis(u0.y, j, d.y);

    let budget = (i_end - i).abs() + (j_end - j).abs() + 1;
    let mut out = Vec::with_capacity(budget as usize);
    out.push((i, j));
    for _ in 0..budget {
        if (i, j) == (i_end, j_end) {
            break;
        }
        if t_max_i < t_max_j {
            i += step_i;
            t_max_i += t_delta_i;
        } else {
            j += step_j;
            t_max_j += t_delta_j;
        }
        out.push((i, j));
    }
    if out.last() != Some(&(i_end, j_end)) {
        out.push((i_end, j_end));
    }
    out
}

/// Grid geometry covering the building with a margin.
///
/// The origin sits one and a half cells below the lowest vertex so that
/// coordinates on the resolution lattice fall on cell centres.
pub fn grid_frame(graph: &BuildingGraph, resolution: f64) -> (Point2, usize, usize) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in graph.nodes().values().flat_map(|r| r.polygon.iter()) {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let origin = Point2::new(lo.x - 1.5 * resolution, lo.y - 1.5 * resolution);
    let cells = |span: f64| ((span / resolution) - 1e-9).ceil().max(0.0) as usize + 3;
    (origin, cells(hi.x - lo.x), cells(hi.y - lo.y))
}

/// Builds the a priori semantic grid of a building.
///
/// Every cell starts free (`P_FREE_PRIOR`, class 0). Wall segments are then
/// marked occupied (`P_OCCUPIED_PRIOR`) with their material class, rooms in
/// id order. Finally each door clears the wall cells whose centre lies
/// within half the door width of the door location.
pub fn rasterize(graph: &BuildingGraph, resolution: f64) -> Result<SemanticOccupancyGrid, RasterError> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(RasterError::InvalidResolution(resolution));
    }
    let (origin, width, height) = grid_frame(graph, resolution);
    let mut grid = SemanticOccupancyGrid::filled(resolution, origin, width, height, P_FREE_PRIOR);

    for room in graph.nodes().values() {
        for (a, b, material) in room.wall_segments() {
            for (i, j) in segment_cells(origin, resolution, a, b) {
                if grid.contains_signed(i, j) {
                    grid.set_cell(CellIndex::new(i as usize, j as usize), P_OCCUPIED_PRIOR, material);
                }
            }
        }
    }

    let mut last_door: Option<&str> = None;
    for edge in graph.hyperedges().values() {
        if last_door == Some(edge.door_id.as_str()) {
            continue;
        }
        last_door = Some(&edge.door_id);
        if edge.width < resolution {
            return Err(RasterError::DoorGapVanishes {
                door: edge.door_id.clone(),
                width: edge.width,
                resolution,
            });
        }
        clear_disc(&mut grid, edge.location, edge.width / 2.0);
    }
    Ok(grid)
}

fn clear_disc(grid: &mut SemanticOccupancyGrid, center: Point2, radius: f64) {
    let (ci, cj) = grid.world_to_cell_signed(&center);
    let reach = (radius / grid.resolution()).ceil() as i64 + 1;
    for j in (cj - reach)..=(cj + reach) {
        for i in (ci - reach)..=(ci + reach) {
            if !grid.contains_signed(i, j) {
                continue;
            }
            let c = CellIndex::new(i as usize, j as usize);
            if grid.is_occupied(c) && grid.cell_center(c).distance(&center) <= radius {
                grid.set_cell(c, P_FREE_PRIOR, ClassId::UNKNOWN);
            }
        }
    }
}
