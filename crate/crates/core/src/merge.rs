//! Log-odds occupancy updates that fold live scans into the semantic grid.
//!
//! Class labels are never written here: cells that came from the building
//! model keep their material, and cells that become occupied through scans
//! stay class 0 (obstacles the building model did not know about).

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::geometry::Pose2D;
use crate::grid::{ClassMask, SemanticOccupancyGrid};
use crate::localization::raycast::{bresenham, RaycastError};
use crate::localization::LaserScan;

/// Probabilities are clamped into [EPS, 1 - EPS] before taking log-odds.
pub const PROBABILITY_EPS: f64 = 1e-6;

/// Log-odds of an occupancy probability, clamped away from 0 and 1.
pub fn logodds(p: f64) -> f64 {
    let p = p.clamp(PROBABILITY_EPS, 1.0 - PROBABILITY_EPS);
    (p / (1.0 - p)).ln()
}

/// Inverse of [`logodds`].
pub fn probability(l: f64) -> f64 {
    if l >= 0.0 {
        1.0 / (1.0 + (-l).exp())
    } else {
        let e = l.exp();
        e / (1.0 + e)
    }
}

/// Inverse sensor model for the lidar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InverseSensorParams {
    pub l_occ: f64,
    pub l_free: f64,
    pub l_min: f64,
    pub l_max: f64,
    /// Material classes the lidar can observe. Free-space evidence is not
    /// applied to cells whose class is outside this set: a beam passing a
    /// glass wall says nothing about the glass.
    #[serde(skip, default = "ClassMask::all")]
    pub sensor_mask: ClassMask,
}

impl Default for InverseSensorParams {
    fn default() -> Self {
        InverseSensorParams {
            l_occ: 0.85,
            l_free: -0.4,
            l_min: -5.0,
            l_max: 5.0,
            sensor_mask: ClassMask::all(),
        }
    }
}

impl InverseSensorParams {
    pub fn with_mask(mut self, mask: ClassMask) -> Self {
        self.sensor_mask = mask;
        self
    }
}

/// Folds one scan taken at `pose` into the grid.
///
/// For every beam, the cells strictly before the endpoint receive `l_free`
/// and, when the range is below `range_max`, the endpoint cell receives
/// `l_occ`. Beams are truncated where they leave the grid.
pub fn merge_scan(
    grid: &mut SemanticOccupancyGrid,
    pose: &Pose2D,
    scan: &LaserScan,
    model: &InverseSensorParams,
) -> Result<(), RaycastError> {
    let origin = pose.position();
    let (i0, j0) = grid.world_to_cell_signed(&origin);
    if !grid.contains_signed(i0, j0) {
        return Err(RaycastError::OutsideGrid { x: pose.x, y: pose.y });
    }
    for (k, &range) in scan.ranges.iter().enumerate() {
        let angle = pose.theta + scan.beam_angle(k);
        let hit = range < scan.range_max;
        let r = range.min(scan.range_max);
        let end = crate::geometry::Point2::new(origin.x + r * angle.cos(), origin.y + r * angle.sin());
        let (i1, j1) = grid.world_to_cell_signed(&end);
        let mut cells = bresenham(i0, j0, i1, j1).peekable();
        while let Some((i, j)) = cells.next() {
            if !grid.contains_signed(i, j) {
                break;
            }
            let c = crate::grid::CellIndex::new(i as usize, j as usize);
            let is_end = cells.peek().is_none();
            let delta = if is_end {
                if !hit {
                    break;
                }
                model.l_occ
            } else {
                if !model.sensor_mask.contains(grid.cell(c).class) {
                    continue;
                }
                model.l_free
            };
            let l = (grid.cell(c).l + delta).clamp(model.l_min, model.l_max);
            grid.set_logodds(c, l);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::grid::{CellIndex, ClassId};
    use alloc::vec;

    #[test]
    fn logodds_fixed_points() {
        assert_eq!(logodds(0.5), 0.0);
        assert!((probability(libm::log(3.0)) - 0.75).abs() < 1e-15);
        assert!((logodds(0.0) - logodds(PROBABILITY_EPS)).abs() < 1e-15);
        assert!(logodds(1.0).is_finite());
    }

    fn blank() -> SemanticOccupancyGrid {
        SemanticOccupancyGrid::filled(1.0, Point2::new(0.0, 0.0), 10, 10, 0.5)
    }

    #[test]
    fn max_range_scan_only_clears() {
        let mut g = blank();
        let scan = LaserScan {
            angle_min: 0.0,
            angle_increment: 0.0,
            ranges: vec![3.0],
            range_max: 3.0,
        };
        merge_scan(
            &mut g,
            &Pose2D::new(0.5, 0.5, 0.0),
            &scan,
            &InverseSensorParams::default(),
        )
        .unwrap();
        for i in 0..3 {
            assert_eq!(g.cell(CellIndex::new(i, 0)).l, -0.4);
        }
        assert_eq!(g.cell(CellIndex::new(3, 0)).l, 0.0);
    }

    #[test]
    fn clamps_and_keeps_classes() {
        let mut g = blank();
        g.set_cell(CellIndex::new(2, 0), 0.95, ClassId(4));
        let scan = LaserScan {
            angle_min: 0.0,
            angle_increment: 0.0,
            ranges: vec![2.0],
            range_max: 8.0,
        };
        let model = InverseSensorParams::default();
        for _ in 0..50 {
            merge_scan(&mut g, &Pose2D::new(0.5, 0.5, 0.0), &scan, &model).unwrap();
        }
        let wall = g.cell(CellIndex::new(2, 0));
        assert_eq!(wall.l, 5.0);
        assert_eq!(wall.class, ClassId(4));
        assert_eq!(g.cell(CellIndex::new(1, 0)).l, -5.0);
    }

    #[test]
    fn invisible_classes_receive_no_free_evidence() {
        let mut g = blank();
        g.set_cell(CellIndex::new(2, 0), 0.95, ClassId(2));
        let before = *g.cell(CellIndex::new(2, 0));
        let scan = LaserScan {
            angle_min: 0.0,
            angle_increment: 0.0,
            ranges: vec![5.0],
            range_max: 5.0,
        };
        let mut mask = ClassMask::all();
        mask.remove(ClassId(2));
        let model = InverseSensorParams::default().with_mask(mask);
        merge_scan(&mut g, &Pose2D::new(0.5, 0.5, 0.0), &scan, &model).unwrap();
        assert_eq!(*g.cell(CellIndex::new(2, 0)), before);
        assert_eq!(g.cell(CellIndex::new(3, 0)).l, -0.4);
    }

    #[test]
    fn pose_outside_grid_is_an_error() {
        let mut g = blank();
        let scan = LaserScan {
            angle_min: 0.0,
            angle_increment: 0.0,
            ranges: vec![1.0],
            range_max: 5.0,
        };
        assert!(merge_scan(
            &mut g,
            &Pose2D::new(-1.0, 0.5, 0.0),
            &scan,
            &InverseSensorParams::default()
        )
        .is_err());
    }
}
