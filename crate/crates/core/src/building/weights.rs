//! Node and hyperedge weights.
//!
//! A room's weight is the sum of four independent terms: wall material, floor
//! area, scan age and hazard. A door's weight depends only on whether the
//! robot pushes or pulls it in the direction of travel.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DoorHyperedge, Hazard, MaterialClass, RoomNode, Swing};
use crate::time::{Timestamp, SECONDS_PER_WEEK};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightConfig {
    /// Material term when any wall is invisible to the lidar (curtain wall).
    pub w_m_invisible: f64,
    pub w_m_visible: f64,
    /// Area band edges in m²; bands are `[0, t0)`, `[t0, t1)`, `[t1, ∞)`.
    pub area_thresholds: [f64; 2],
    pub area_weights: [f64; 3],
    /// Scan-age band edges in seconds; bands are `[0, t0)`, `[t0, t1)`, `[t1, ∞)`.
    pub scan_thresholds: [f64; 2],
    pub scan_weights: [f64; 3],
    pub w_h_high: f64,
    pub w_d_push: f64,
    pub w_d_pull: f64,
    /// Rooms at or above this node weight raise a warning.
    pub warning_threshold: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            w_m_invisible: 12.0,
            w_m_visible: 4.0,
            area_thresholds: [50.0, 100.0],
            area_weights: [2.0, 8.0, 12.0],
            scan_thresholds: [SECONDS_PER_WEEK, 2.0 * SECONDS_PER_WEEK],
            scan_weights: [10.0, 6.0, 0.0],
            w_h_high: 500.0,
            w_d_push: 2.0,
            w_d_pull: 6.0,
            warning_threshold: 500.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightConfigError {
    #[error("weight {0} must be finite and non-negative")]
    NegativeWeight(&'static str),
    #[error("{0} thresholds must be finite and strictly increasing")]
    Thresholds(&'static str),
}

impl WeightConfig {
    pub fn validate(&self) -> Result<(), WeightConfigError> {
        let scalars = [
            ("w_m_invisible", self.w_m_invisible),
            ("w_m_visible", self.w_m_visible),
            ("w_h_high", self.w_h_high),
            ("w_d_push", self.w_d_push),
            ("w_d_pull", self.w_d_pull),
            ("warning_threshold", self.warning_threshold),
        ];
        for (name, v) in scalars {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(WeightConfigError::NegativeWeight(name));
            }
        }
        for v in self.area_weights {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(WeightConfigError::NegativeWeight("area_weights"));
            }
        }
        for v in self.scan_weights {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(WeightConfigError::NegativeWeight("scan_weights"));
            }
        }
        let increasing = |t: [f64; 2]| t[0].is_finite() && t[1].is_finite() && t[0] >= 0.0 && t[0] < t[1];
        if !increasing(self.area_thresholds) {
            return Err(WeightConfigError::Thresholds("area"));
        }
        if !increasing(self.scan_thresholds) {
            return Err(WeightConfigError::Thresholds("scan"));
        }
        Ok(())
    }

    pub fn material_weight(&self, room: &RoomNode, materials: &[MaterialClass]) -> f64 {
        room.wall_materials()
            .map(|id| {
                let visible = materials
                    .iter()
                    .find(|m| m.id == id)
                    .is_none_or(|m| m.detectable_by_lidar);
                if visible {
                    self.w_m_visible
                } else {
                    self.w_m_invisible
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn area_weight(&self, area: f64) -> f64 {
        self.area_weights[band(area, self.area_thresholds)]
    }

    /// Scan-age term. Rooms never scanned fall in the oldest band.
    pub fn scan_weight(&self, last_scan: Option<Timestamp>, now: Timestamp) -> f64 {
        match last_scan {
            None => self.scan_weights[2],
            Some(t) => self.scan_weights[band(now.since(t).max(0.0), self.scan_thresholds)],
        }
    }

    pub fn hazard_weight(&self, hazard: Hazard) -> f64 {
        match hazard {
            Hazard::None => 0.0,
            Hazard::High => self.w_h_high,
        }
    }
}

fn band(value: f64, thresholds: [f64; 2]) -> usize {
    if value < thresholds[0] {
        0
    } else if value < thresholds[1] {
        1
    } else {
        2
    }
}

/// The four terms of a node weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeWeightBreakdown {
    pub material: f64,
    pub area: f64,
    pub scan: f64,
    pub hazard: f64,
}

impl NodeWeightBreakdown {
    pub fn compute(room: &RoomNode, materials: &[MaterialClass], cfg: &WeightConfig, now: Timestamp) -> Self {
        NodeWeightBreakdown {
            material: cfg.material_weight(room, materials),
            area: cfg.area_weight(room.area),
            scan: cfg.scan_weight(room.last_scan, now),
            hazard: cfg.hazard_weight(room.hazard),
        }
    }

    pub fn total(&self) -> f64 {
        self.material + self.area + self.scan + self.hazard
    }
}

/// Total weight of a room node.
///
/// The material term is the maximum over the room's walls: a single curtain
/// wall makes the whole room count as invisible.
pub fn node_weight(room: &RoomNode, materials: &[MaterialClass], cfg: &WeightConfig, now: Timestamp) -> f64 {
    NodeWeightBreakdown::compute(room, materials, cfg, now).total()
}

pub fn edge_weight(edge: &DoorHyperedge, cfg: &WeightConfig) -> f64 {
    match edge.direction_cost {
        Swing::Push => cfg.w_d_push,
        Swing::Pull => cfg.w_d_pull,
    }
}
