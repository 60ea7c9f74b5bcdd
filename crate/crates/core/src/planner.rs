//! Minimum-weight room/door sequences over the building hypergraph.
//!
//! Every door hyperedge has exactly one tail and one head room, so the search
//! is label-setting over rooms: a label's cost is the accumulated node plus
//! hyperedge weight of its room sequence. Weights are non-negative, which
//! makes the first label settled at the goal optimal. Equal costs are broken
//! by the lexicographic order of the room id sequence.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::building::{edge_weight, node_weight, BuildingGraph, DoorHyperedge, Hazard, WeightConfig};
use crate::geometry::Point2;
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningReason {
    /// The room is on the returned path and its weight reaches the threshold.
    HighWeightOnPath,
    /// The room made the planner leave the path it would otherwise take.
    HazardAvoided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathWarning {
    pub room_id: String,
    pub reason: WarningReason,
    pub weight: f64,
}

/// Planner output: alternating room and door ids with their coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticPath {
    pub semantic_path: Vec<String>,
    pub x_y_path: Vec<Point2>,
    pub total_weight: f64,
    pub warnings: Vec<PathWarning>,
}

impl SemanticPath {
    /// Room ids in travel order.
    pub fn rooms(&self) -> impl Iterator<Item = &str> {
        self.semantic_path.iter().step_by(2).map(String::as_str)
    }

    /// Door ids in travel order.
    pub fn doors(&self) -> impl Iterator<Item = &str> {
        self.semantic_path.iter().skip(1).step_by(2).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("unknown room id {0:?}")]
    UnknownRoom(String),
    #[error("no path from {start:?} to {goal:?}")]
    NoPath { start: String, goal: String },
    #[error("door {door:?} does not lead from {from:?} to {to:?}")]
    InvalidStep { door: String, from: String, to: String },
    #[error("semantic path must alternate rooms and doors, starting and ending with a room")]
    Malformed,
}

#[derive(Debug, Clone)]
struct Label {
    cost: f64,
    rooms: Vec<String>,
    doors: Vec<String>,
}

impl Label {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.rooms.cmp(&other.rooms))
    }
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl Eq for Label {}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

/// Node weight of every room, keyed by id.
pub fn node_weights(graph: &BuildingGraph, cfg: &WeightConfig, now: Timestamp) -> BTreeMap<String, f64> {
    graph
        .nodes()
        .iter()
        .map(|(id, r)| (id.clone(), node_weight(r, graph.materials(), cfg, now)))
        .collect()
}

/// The cheapest hyperedge from `from` to `to`; ties go to the smaller door id.
fn best_edge<'g>(graph: &'g BuildingGraph, from: &str, to: &str, cfg: &WeightConfig) -> Option<&'g DoorHyperedge> {
    graph.outgoing(from).filter(|e| e.head_room == to).min_by(|a, b| {
        edge_weight(a, cfg)
            .total_cmp(&edge_weight(b, cfg))
            .then_with(|| a.door_id.cmp(&b.door_id))
    })
}

fn search(
    graph: &BuildingGraph,
    start: &str,
    goal: &str,
    cfg: &WeightConfig,
    weights: &BTreeMap<String, f64>,
) -> Option<Label> {
    let mut heap = BinaryHeap::new();
    let mut settled: BTreeSet<String> = BTreeSet::new();
    heap.push(Label {
        cost: weights[start],
        rooms: vec![start.to_string()],
        doors: Vec::new(),
    });
    while let Some(label) = heap.pop() {
        let here = label.rooms.last().expect("labels are never empty").clone();
        if !settled.insert(here.clone()) {
            continue;
        }
        if here == goal {
            return Some(label);
        }
        let heads: BTreeSet<&str> = graph.outgoing(&here).map(|e| e.head_room.as_str()).collect();
        for head in heads {
            if settled.contains(head) || label.rooms.iter().any(|r| r == head) {
                continue;
            }
            let edge = best_edge(graph, &here, head, cfg).expect("head came from an outgoing edge");
            let mut rooms = label.rooms.clone();
            rooms.push(head.to_string());
            let mut doors = label.doors.clone();
            doors.push(edge.door_id.clone());
            heap.push(Label {
                cost: label.cost + edge_weight(edge, cfg) + weights[head],
                rooms,
                doors,
            });
        }
    }
    None
}

fn assemble(graph: &BuildingGraph, rooms: &[String], doors: &[String]) -> (Vec<String>, Vec<Point2>) {
    let mut ids = Vec::with_capacity(rooms.len() + doors.len());
    let mut xy = Vec::with_capacity(rooms.len() + doors.len());
    for (k, room) in rooms.iter().enumerate() {
        ids.push(room.clone());
        xy.push(graph.nodes()[room].center);
        if let Some(door) = doors.get(k) {
            let loc = graph
                .outgoing(room)
                .find(|e| &e.door_id == door)
                .map(|e| e.location)
                .expect("door was taken from this room's outgoing edges");
            ids.push(door.clone());
            xy.push(loc);
        }
    }
    (ids, xy)
}

/// Total weight of a semantic path: the sum of its node weights plus the sum
/// of its hyperedge weights, each hyperedge taken in the direction of travel.
pub fn path_weight(
    graph: &BuildingGraph,
    semantic_path: &[String],
    cfg: &WeightConfig,
    now: Timestamp,
) -> Result<f64, PlanError> {
    if semantic_path.len().is_multiple_of(2) {
        return Err(PlanError::Malformed);
    }
    let mut nodes = 0.0;
    for room in semantic_path.iter().step_by(2) {
        let r = graph.room(room).ok_or_else(|| PlanError::UnknownRoom(room.clone()))?;
        nodes += node_weight(r, graph.materials(), cfg, now);
    }
    let mut edges = 0.0;
    for k in (1..semantic_path.len()).step_by(2) {
        let (from, door, to) = (&semantic_path[k - 1], &semantic_path[k], &semantic_path[k + 1]);
        let e = graph
            .outgoing(from)
            .find(|e| &e.door_id == door && &e.head_room == to)
            .ok_or_else(|| PlanError::InvalidStep {
                door: door.clone(),
                from: from.clone(),
                to: to.clone(),
            })?;
        edges += edge_weight(e, cfg);
    }
    Ok(nodes + edges)
}

/// Plans the minimum-weight simple room sequence from `start` to `goal`.
pub fn plan(
    graph: &BuildingGraph,
    start: &str,
    goal: &str,
    cfg: &WeightConfig,
    now: Timestamp,
) -> Result<SemanticPath, PlanError> {
    for id in [start, goal] {
        if graph.room(id).is_none() {
            return Err(PlanError::UnknownRoom(id.to_string()));
        }
    }
    let weights = node_weights(graph, cfg, now);
    let best = search(graph, start, goal, cfg, &weights).ok_or_else(|| PlanError::NoPath {
        start: start.to_string(),
        goal: goal.to_string(),
    })?;
    let (semantic_path, x_y_path) = assemble(graph, &best.rooms, &best.doors);
    let total_weight = path_weight(graph, &semantic_path, cfg, now)?;

    let mut warnings: Vec<PathWarning> = best
        .rooms
        .iter()
        .filter(|r| weights[*r] >= cfg.warning_threshold)
        .map(|r| PathWarning {
            room_id: r.clone(),
            reason: WarningReason::HighWeightOnPath,
            weight: weights[r],
        })
        .collect();

    let hazardous = |id: &String| graph.nodes()[id].hazard == Hazard::High;
    if cfg.w_h_high > 0.0 && graph.nodes().keys().any(hazardous) {
        let blind = WeightConfig { w_h_high: 0.0, ..*cfg };
        let blind_weights = node_weights(graph, &blind, now);
        if let Some(unaware) = search(graph, start, goal, &blind, &blind_weights) {
            for r in unaware.rooms.iter().filter(|r| hazardous(r)) {
                if !best.rooms.contains(r) && weights[r] >= cfg.warning_threshold {
                    warnings.push(PathWarning {
                        room_id: r.clone(),
                        reason: WarningReason::HazardAvoided,
                        weight: weights[r],
                    });
                }
            }
        }
    }

    Ok(SemanticPath {
        semantic_path,
        x_y_path,
        total_weight,
        warnings,
    })
}

/// Marks every visited room as scanned at `now`, so later plans prefer
/// rooms that were not just explored.
pub fn replan_after_visit(
    graph: &BuildingGraph,
    visited: &[String],
    now: Timestamp,
) -> Result<BuildingGraph, PlanError> {
    let mut next = graph.clone();
    for room in visited {
        next = next
            .touch_scan(room, now)
            .map_err(|_| PlanError::UnknownRoom(room.clone()))?;
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::building::description::*;
    use crate::building::Swing;

    fn corridor(n: usize) -> BuildingGraph {
        let rooms = (0..n)
            .map(|k| {
                let x0 = 4.0 * k as f64;
                RoomDescription {
                    id: alloc::format!("R{k}"),
                    name: alloc::format!("Room {k}"),
                    center: Point2::new(x0 + 2.0, 2.0),
                    area_m2: 16.0,
                    polygon: vec![
                        Point2::new(x0, 0.0),
                        Point2::new(x0 + 4.0, 0.0),
                        Point2::new(x0 + 4.0, 4.0),
                        Point2::new(x0, 4.0),
                    ],
                    walls: (0..4)
                        .map(|w| WallDescription {
                            id: alloc::format!("R{k}w{w}"),
                            material: 0,
                        })
                        .collect(),
                    last_scan: None,
                    hazard: Hazard::None,
                }
            })
            .collect();
        let doors = (1..n)
            .map(|k| DoorDescription {
                id: alloc::format!("D{k}"),
                rooms: [alloc::format!("R{}", k - 1), alloc::format!("R{k}")],
                location: Point2::new(4.0 * k as f64, 2.0),
                swing: SwingDescription {
                    a_to_b: Swing::Push,
                    b_to_a: Swing::Pull,
                },
                width: None,
            })
            .collect();
        BuildingGraph::from_description(&BuildingDescription {
            materials: vec![],
            rooms,
            doors,
        })
        .unwrap()
    }

    const NOW: Timestamp = Timestamp(1_700_000_000.0);

    #[test]
    fn start_equals_goal() {
        let g = corridor(3);
        let cfg = WeightConfig::default();
        let p = plan(&g, "R1", "R1", &cfg, NOW).unwrap();
        assert_eq!(p.semantic_path, ["R1"]);
        assert_eq!(p.total_weight, 6.0);
        assert!(p.warnings.is_empty());
        assert_eq!(p.x_y_path, [Point2::new(6.0, 2.0)]);
    }

    #[test]
    fn directed_weights_differ() {
        let g = corridor(3);
        let cfg = WeightConfig::default();
        let fwd = plan(&g, "R0", "R2", &cfg, NOW).unwrap();
        let back = plan(&g, "R2", "R0", &cfg, NOW).unwrap();
        assert_eq!(fwd.semantic_path, ["R0", "D1", "R1", "D2", "R2"]);
        assert_eq!(fwd.total_weight, 18.0 + 4.0);
        assert_eq!(back.total_weight, 18.0 + 12.0);
        assert_eq!(fwd.x_y_path.len(), fwd.semantic_path.len());
    }

    #[test]
    fn unavoidable_hazard_warns_on_path() {
        let g = corridor(3).with_hazard("R1", Hazard::High).unwrap();
        let p = plan(&g, "R0", "R2", &WeightConfig::default(), NOW).unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert_eq!(p.warnings[0].room_id, "R1");
        assert_eq!(p.warnings[0].reason, WarningReason::HighWeightOnPath);
        assert_eq!(p.warnings[0].weight, 506.0);
    }

    #[test]
    fn errors() {
        let g = corridor(2);
        let cfg = WeightConfig::default();
        assert_eq!(
            plan(&g, "R0", "X", &cfg, NOW),
            Err(PlanError::UnknownRoom("X".to_string()))
        );
        let mut desc = g.to_description();
        desc.doors.clear();
        let split = BuildingGraph::from_description(&desc).unwrap();
        assert!(matches!(
            plan(&split, "R0", "R1", &cfg, NOW),
            Err(PlanError::NoPath { .. })
        ));
    }

    #[test]
    fn single_corridor_return_is_reverse() {
        let g = corridor(3);
        let cfg = WeightConfig::default();
        let out = plan(&g, "R0", "R2", &cfg, NOW).unwrap();
        let rooms: Vec<String> = out.rooms().map(String::from).collect();
        let g2 = replan_after_visit(&g, &rooms, NOW).unwrap();
        let back = plan(&g2, "R2", "R0", &cfg, NOW).unwrap();
        let mut rev: Vec<&str> = out.rooms().collect();
        rev.reverse();
        assert_eq!(back.rooms().collect::<Vec<_>>(), rev);
        assert!(replan_after_visit(&g, &["nope".to_string()], NOW).is_err());
    }
}
