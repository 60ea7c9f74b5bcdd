//! Serde shapes of the building description document.
//!
//! ```json
//! { "materials": [{"id": 1, "name": "concrete", "detectable_by_lidar": true}],
//!   "rooms": [{"id": "R1", "name": "Lab", "center": [2, 2], "area_m2": 16,
//!              "polygon": [[0,0],[4,0],[4,4],[0,4]],
//!              "walls": [{"id": "w1", "material": 1}, ...],
//!              "last_scan": "2021-06-01T00:00:00Z", "hazard": "none"}],
//!   "doors": [{"id": "D1", "rooms": ["R1", "R2"], "location": [4, 2],
//!              "swing": {"a_to_b": "push", "b_to_a": "pull"}}] }
//! ```
//!
//! Wall `k` of a room is the polygon edge from vertex `k` to vertex `k + 1`.
//! Points may be written as `[x, y]` or `{"x": .., "y": ..}`.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Deserializer, Serialize};

use super::{Hazard, Swing};
use crate::geometry::Point2;
use crate::time::Timestamp;

#[derive(Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Pair([f64; 2]),
    Named { x: f64, y: f64 },
}

impl From<PointRepr> for Point2 {
    fn from(p: PointRepr) -> Point2 {
        match p {
            PointRepr::Pair([x, y]) => Point2::new(x, y),
            PointRepr::Named { x, y } => Point2::new(x, y),
        }
    }
}

fn point<'de, D: Deserializer<'de>>(d: D) -> Result<Point2, D::Error> {
    PointRepr::deserialize(d).map(Into::into)
}

fn points<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Point2>, D::Error> {
    Vec::<PointRepr>::deserialize(d).map(|v| v.into_iter().map(Into::into).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialDescription {
    pub id: u8,
    pub name: String,
    pub detectable_by_lidar: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallDescription {
    pub id: String,
    pub material: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomDescription {
    pub id: String,
    pub name: String,
    #[serde(deserialize_with = "point")]
    pub center: Point2,
    pub area_m2: f64,
    #[serde(deserialize_with = "points")]
    pub polygon: Vec<Point2>,
    pub walls: Vec<WallDescription>,
    #[serde(default)]
    pub last_scan: Option<Timestamp>,
    #[serde(default)]
    pub hazard: Hazard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwingDescription {
    pub a_to_b: Swing,
    pub b_to_a: Swing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoorDescription {
    pub id: String,
    pub rooms: [String; 2],
    #[serde(deserialize_with = "point")]
    pub location: Point2,
    pub swing: SwingDescription,
    /// Clear opening width in metres; the standard 0.9 m door when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingDescription {
    #[serde(default)]
    pub materials: Vec<MaterialDescription>,
    pub rooms: Vec<RoomDescription>,
    #[serde(default)]
    pub doors: Vec<DoorDescription>,
}
