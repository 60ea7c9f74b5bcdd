//! Building knowledge: rooms are hypergraph nodes and each door becomes a pair
//! of directed hyperedges.

pub mod description;
pub mod raster;
pub mod weights;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{is_simple_polygon, point_in_polygon, signed_area, Point2};
use crate::grid::{ClassId, ClassMask};
use crate::time::Timestamp;

pub use description::BuildingDescription;
pub use raster::{rasterize, RasterError, DEFAULT_DOOR_WIDTH};
pub use weights::{edge_weight, node_weight, NodeWeightBreakdown, WeightConfig, WeightConfigError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaterialClass {
    pub id: ClassId,
    pub name: String,
    pub detectable_by_lidar: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hazard {
    #[default]
    None,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Swing {
    Push,
    Pull,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wall {
    pub id: String,
    pub material: ClassId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomNode {
    pub room_id: String,
    pub name: String,
    pub center: Point2,
    /// Floor area in square metres.
    pub area: f64,
    /// `walls[k]` runs from `polygon[k]` to `polygon[k + 1]`.
    pub walls: Vec<Wall>,
    pub last_scan: Option<Timestamp>,
    pub hazard: Hazard,
    pub polygon: Vec<Point2>,
}

impl RoomNode {
    pub fn wall_ids(&self) -> impl Iterator<Item = &str> {
        self.walls.iter().map(|w| w.id.as_str())
    }

    pub fn wall_materials(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.walls.iter().map(|w| w.material)
    }

    pub fn contains(&self, p: &Point2) -> bool {
        point_in_polygon(p, &self.polygon)
    }

    /// Wall segments as (start, end, material).
    pub fn wall_segments(&self) -> impl Iterator<Item = (Point2, Point2, ClassId)> + '_ {
        let n = self.polygon.len();
        self.walls
            .iter()
            .enumerate()
            .map(move |(k, w)| (self.polygon[k], self.polygon[(k + 1) % n], w.material))
    }
}

/// Which way a directed hyperedge crosses its door.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoorDirection {
    AToB,
    BToA,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HyperedgeId {
    pub door_id: String,
    pub direction: DoorDirection,
}

impl fmt::Display for HyperedgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dir = match self.direction {
            DoorDirection::AToB => "a_to_b",
            DoorDirection::BToA => "b_to_a",
        };
        write!(f, "{}:{}", self.door_id, dir)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoorHyperedge {
    pub door_id: String,
    pub direction: DoorDirection,
    pub tail_room: String,
    pub head_room: String,
    pub location: Point2,
    pub direction_cost: Swing,
    /// Clear opening width, metres.
    pub width: f64,
}

impl DoorHyperedge {
    pub fn id(&self) -> HyperedgeId {
        HyperedgeId {
            door_id: self.door_id.clone(),
            direction: self.direction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildingError {
    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("{referrer} references unknown {kind} {id:?}")]
    UnknownReference {
        referrer: String,
        kind: &'static str,
        id: String,
    },
    #[error("room {room:?}: {reason}")]
    Geometry { room: String, reason: String },
    #[error("door {door:?} connects room {room:?} to itself")]
    SelfLoop { door: String, room: String },
    #[error("door {door:?}: {reason}")]
    InvalidDoor { door: String, reason: String },
    #[error("unknown room id {0:?}")]
    UnknownRoom(String),
    #[error("building has no rooms")]
    Empty,
}

/// Directed B-hypergraph of rooms and doors plus the material table.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingGraph {
    nodes: BTreeMap<String, RoomNode>,
    hyperedges: BTreeMap<HyperedgeId, DoorHyperedge>,
    outgoing: BTreeMap<String, Vec<HyperedgeId>>,
    materials: Vec<MaterialClass>,
}

fn geometry_error(room: &str, reason: &str) -> BuildingError {
    BuildingError::Geometry {
        room: room.to_string(),
        reason: reason.to_string(),
    }
}

impl BuildingGraph {
    /// Validates a description and expands each door into its two directed hyperedges.
    pub fn from_description(desc: &BuildingDescription) -> Result<Self, BuildingError> {
        let mut materials: BTreeMap<u8, MaterialClass> = BTreeMap::new();
        for m in &desc.materials {
            let class = MaterialClass {
                id: ClassId(m.id),
                name: m.name.clone(),
                detectable_by_lidar: m.detectable_by_lidar,
            };
            if materials.insert(m.id, class).is_some() {
                return Err(BuildingError::DuplicateId {
                    kind: "material",
                    id: m.id.to_string(),
                });
            }
        }
        materials.entry(0).or_insert_with(|| MaterialClass {
            id: ClassId::UNKNOWN,
            name: "unknown".to_string(),
            detectable_by_lidar: true,
        });

        if desc.rooms.is_empty() {
            return Err(BuildingError::Empty);
        }
        let mut nodes = BTreeMap::new();
        for r in &desc.rooms {
            if r.polygon.len() < 3 {
                return Err(geometry_error(&r.id, "polygon needs at least 3 vertices"));
            }
            if r.polygon.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                return Err(geometry_error(&r.id, "polygon has non-finite coordinates"));
            }
            if signed_area(&r.polygon).abs() <= 1e-12 {
                return Err(geometry_error(&r.id, "polygon is degenerate (zero area)"));
            }
            if !is_simple_polygon(&r.polygon) {
                return Err(geometry_error(&r.id, "polygon self-intersects"));
            }
            if !(r.area_m2 > 0.0 && r.area_m2.is_finite()) {
                return Err(geometry_error(&r.id, "area must be positive"));
            }
            if !point_in_polygon(&r.center, &r.polygon) {
                return Err(geometry_error(&r.id, "center lies outside the polygon"));
            }
            if r.walls.len() != r.polygon.len() {
                return Err(geometry_error(
                    &r.id,
                    &alloc::format!("{} walls for {} polygon edges", r.walls.len(), r.polygon.len()),
                ));
            }
            for w in &r.walls {
                if !materials.contains_key(&w.material) {
                    return Err(BuildingError::UnknownReference {
                        referrer: alloc::format!("wall {:?} of room {:?}", w.id, r.id),
                        kind: "material",
                        id: w.material.to_string(),
                    });
                }
            }
            let node = RoomNode {
                room_id: r.id.clone(),
                name: r.name.clone(),
                center: r.center,
                area: r.area_m2,
                walls: r
                    .walls
                    .iter()
                    .map(|w| Wall {
                        id: w.id.clone(),
                        material: ClassId(w.material),
                    })
                    .collect(),
                last_scan: r.last_scan,
                hazard: r.hazard,
                polygon: r.polygon.clone(),
            };
            if nodes.insert(r.id.clone(), node).is_some() {
                return Err(BuildingError::DuplicateId {
                    kind: "room",
                    id: r.id.clone(),
                });
            }
        }

        let mut hyperedges = BTreeMap::new();
        let mut door_ids = BTreeMap::new();
        for d in &desc.doors {
            if door_ids.insert(d.id.clone(), ()).is_some() {
                return Err(BuildingError::DuplicateId {
                    kind: "door",
                    id: d.id.clone(),
                });
            }
            for room in &d.rooms {
                if !nodes.contains_key(room) {
                    return Err(BuildingError::UnknownReference {
                        referrer: alloc::format!("door {:?}", d.id),
                        kind: "room",
                        id: room.clone(),
                    });
                }
            }
            let [a, b] = &d.rooms;
            if a == b {
                return Err(BuildingError::SelfLoop {
                    door: d.id.clone(),
                    room: a.clone(),
                });
            }
            let width = d.width.unwrap_or(DEFAULT_DOOR_WIDTH);
            if !(width > 0.0 && width.is_finite()) {
                return Err(BuildingError::InvalidDoor {
                    door: d.id.clone(),
                    reason: "width must be positive".to_string(),
                });
            }
            for (direction, tail, head, swing) in [
                (DoorDirection::AToB, a, b, d.swing.a_to_b),
                (DoorDirection::BToA, b, a, d.swing.b_to_a),
            ] {
                let edge = DoorHyperedge {
                    door_id: d.id.clone(),
                    direction,
                    tail_room: tail.clone(),
                    head_room: head.clone(),
                    location: d.location,
                    direction_cost: swing,
                    width,
                };
                hyperedges.insert(edge.id(), edge);
            }
        }

        Ok(Self::assemble(nodes, hyperedges, materials.into_values().collect()))
    }

    fn assemble(
        nodes: BTreeMap<String, RoomNode>,
        hyperedges: BTreeMap<HyperedgeId, DoorHyperedge>,
        materials: Vec<MaterialClass>,
    ) -> Self {
        let mut outgoing: BTreeMap<String, Vec<HyperedgeId>> = nodes.keys().map(|k| (k.clone(), Vec::new())).collect();
        for (id, e) in &hyperedges {
            if let Some(v) = outgoing.get_mut(&e.tail_room) {
                v.push(id.clone());
            }
        }
        BuildingGraph {
            nodes,
            hyperedges,
            outgoing,
            materials,
        }
    }

    /// Turns the graph back into a description document.
    pub fn to_description(&self) -> BuildingDescription {
        use description::*;
        let mut doors: BTreeMap<&str, DoorDescription> = BTreeMap::new();
        for e in self.hyperedges.values() {
            let entry = doors.entry(&e.door_id).or_insert_with(|| DoorDescription {
                id: e.door_id.clone(),
                rooms: [e.tail_room.clone(), e.head_room.clone()],
                location: e.location,
                swing: SwingDescription {
                    a_to_b: e.direction_cost,
                    b_to_a: e.direction_cost,
                },
                width: (e.width != DEFAULT_DOOR_WIDTH).then_some(e.width),
            });
            match e.direction {
                DoorDirection::AToB => {
                    entry.rooms = [e.tail_room.clone(), e.head_room.clone()];
                    entry.swing.a_to_b = e.direction_cost;
                }
                DoorDirection::BToA => entry.swing.b_to_a = e.direction_cost,
            }
        }
        BuildingDescription {
            materials: self
                .materials
                .iter()
                .map(|m| MaterialDescription {
                    id: m.id.0,
                    name: m.name.clone(),
                    detectable_by_lidar: m.detectable_by_lidar,
                })
                .collect(),
            rooms: self
                .nodes
                .values()
                .map(|r| RoomDescription {
                    id: r.room_id.clone(),
                    name: r.name.clone(),
                    center: r.center,
                    area_m2: r.area,
                    polygon: r.polygon.clone(),
                    walls: r
                        .walls
                        .iter()
                        .map(|w| WallDescription {
                            id: w.id.clone(),
                            material: w.material.0,
                        })
                        .collect(),
                    last_scan: r.last_scan,
                    hazard: r.hazard,
                })
                .collect(),
            doors: doors.into_values().collect(),
        }
    }

    pub fn nodes(&self) -> &BTreeMap<String, RoomNode> {
        &self.nodes
    }

    pub fn hyperedges(&self) -> &BTreeMap<HyperedgeId, DoorHyperedge> {
        &self.hyperedges
    }

    pub fn materials(&self) -> &[MaterialClass] {
        &self.materials
    }

    pub fn room(&self, id: &str) -> Option<&RoomNode> {
        self.nodes.get(id)
    }

    pub fn material(&self, id: ClassId) -> Option<&MaterialClass> {
        self.materials.iter().find(|m| m.id == id)
    }

    /// Hyperedges whose tail is `room`, ordered by id.
    pub fn outgoing(&self, room: &str) -> impl Iterator<Item = &DoorHyperedge> {
        self.outgoing
            .get(room)
            .into_iter()
            .flatten()
            .map(move |id| &self.hyperedges[id])
    }

    /// Classes a lidar can see (class 0 included).
    pub fn lidar_mask(&self) -> ClassMask {
        ClassMask::from_ids(self.materials.iter().filter(|m| m.detectable_by_lidar).map(|m| m.id))
    }

    /// The room whose polygon contains `p`, lowest id first on overlap.
    pub fn room_at(&self, p: &Point2) -> Option<&RoomNode> {
        self.nodes.values().find(|r| r.contains(p))
    }

    /// Copy of the graph with `room_id` marked as scanned at `now`.
    pub fn touch_scan(&self, room_id: &str, now: Timestamp) -> Result<Self, BuildingError> {
        let mut next = self.clone();
        next.nodes
            .get_mut(room_id)
            .ok_or_else(|| BuildingError::UnknownRoom(room_id.to_string()))?
            .last_scan = Some(now);
        Ok(next)
    }

    /// Copy of the graph with a room's hazard level replaced.
    pub fn with_hazard(&self, room_id: &str, hazard: Hazard) -> Result<Self, BuildingError> {
        let mut next = self.clone();
        next.nodes
            .get_mut(room_id)
            .ok_or_else(|| BuildingError::UnknownRoom(room_id.to_string()))?
            .hazard = hazard;
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::description::*;
    use super::*;
    use alloc::vec;

    pub(crate) fn square(id: &str, x0: f64, y0: f64, side: f64, material: u8) -> RoomDescription {
        RoomDescription {
            id: id.to_string(),
            name: alloc::format!("Room {id}"),
            center: Point2::new(x0 + side / 2.0, y0 + side / 2.0),
            area_m2: side * side,
            polygon: vec![
                Point2::new(x0, y0),
                Point2::new(x0 + side, y0),
                Point2::new(x0 + side, y0 + side),
                Point2::new(x0, y0 + side),
            ],
            walls: (0..4)
                .map(|k| WallDescription {
                    id: alloc::format!("{id}-w{k}"),
                    material,
                })
                .collect(),
            last_scan: None,
            hazard: Hazard::None,
        }
    }

    fn two_rooms() -> BuildingDescription {
        BuildingDescription {
            materials: vec![MaterialDescription {
                id: 1,
                name: "concrete".to_string(),
                detectable_by_lidar: true,
            }],
            rooms: vec![square("A", 0.0, 0.0, 4.0, 1), square("B", 4.0, 0.0, 4.0, 1)],
            doors: vec![DoorDescription {
                id: "D1".to_string(),
                rooms: ["A".to_string(), "B".to_string()],
                location: Point2::new(4.0, 2.0),
                swing: SwingDescription {
                    a_to_b: Swing::Push,
                    b_to_a: Swing::Pull,
                },
                width: None,
            }],
        }
    }

    #[test]
    fn minimal_building_has_two_directed_edges() {
        let g = BuildingGraph::from_description(&two_rooms()).unwrap();
        assert_eq!(g.nodes().len(), 2);
        assert_eq!(g.hyperedges().len(), 2);
        let ab: vec::Vec<_> = g.outgoing("A").collect();
        assert_eq!(ab.len(), 1);
        assert_eq!(ab[0].head_room, "B");
        assert_eq!(ab[0].direction_cost, Swing::Push);
        let ba: vec::Vec<_> = g.outgoing("B").collect();
        assert_eq!(ba[0].direction_cost, Swing::Pull);
        assert_eq!(g.materials()[0].id, ClassId::UNKNOWN);
    }

    #[test]
    fn dangling_room_reference_is_named() {
        let mut d = two_rooms();
        d.doors[0].rooms[1] = "R9".to_string();
        let err = BuildingGraph::from_description(&d).unwrap_err();
        assert!(matches!(&err, BuildingError::UnknownReference { id, .. } if id == "R9"));
        assert!(alloc::format!("{err}").contains("R9"));
    }

    #[test]
    fn degenerate_polygon_rejected() {
        let mut d = two_rooms();
        d.rooms[0].polygon = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)];
        d.rooms[0].walls.truncate(3);
        assert!(matches!(
            BuildingGraph::from_description(&d),
            Err(BuildingError::Geometry { .. })
        ));
    }

    #[test]
    fn center_outside_rejected() {
        let mut d = two_rooms();
        d.rooms[0].center = Point2::new(10.0, 10.0);
        assert!(matches!(
            BuildingGraph::from_description(&d),
            Err(BuildingError::Geometry { .. })
        ));
    }

    #[test]
    fn self_loop_and_unknown_material_rejected() {
        let mut d = two_rooms();
        d.doors[0].rooms[1] = "A".to_string();
        assert!(matches!(
            BuildingGraph::from_description(&d),
            Err(BuildingError::SelfLoop { .. })
        ));
        let mut d = two_rooms();
        d.rooms[1].walls[2].material = 7;
        assert!(matches!(
            BuildingGraph::from_description(&d),
            Err(BuildingError::UnknownReference { kind: "material", .. })
        ));
    }

    #[test]
    fn touch_scan_sets_timestamp() {
        let g = BuildingGraph::from_description(&two_rooms()).unwrap();
        let now = Timestamp::from_secs(1000.0);
        let t = g.touch_scan("A", now).unwrap();
        assert_eq!(t.room("A").unwrap().last_scan, Some(now));
        assert_eq!(g.room("A").unwrap().last_scan, None);
        let again = t.touch_scan("A", now).unwrap();
        assert_eq!(again, t);
        assert_eq!(g.touch_scan("Z", now), Err(BuildingError::UnknownRoom("Z".to_string())));
    }

    #[test]
    fn description_round_trip() {
        let g = BuildingGraph::from_description(&two_rooms()).unwrap();
        let back = BuildingGraph::from_description(&g.to_description()).unwrap();
        assert_eq!(g, back);
    }
}
