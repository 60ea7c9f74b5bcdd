//! Test-only generators and brute-force oracles, written independently of
//! the library code they check.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;
use semnav_core::building::description::{
    DoorDescription, MaterialDescription, RoomDescription, SwingDescription, WallDescription,
};
use semnav_core::building::{BuildingDescription, Hazard, Swing, WeightConfig};
use semnav_core::geometry::Point2;
use semnav_core::grid::{CellIndex, ClassId, SemanticOccupancyGrid};
use semnav_core::time::Timestamp;

pub const DAY: f64 = 86_400.0;
pub const WEEK: f64 = 7.0 * DAY;

/// Reference time used by generated buildings.
pub fn now() -> Timestamp {
    Timestamp::from_secs(1_780_000_000.0)
}

/// Up to 8 square rooms on a 4 x 2 lattice of 4 m cells, with random
/// attributes that hit every weight band edge, and random doors (possibly
/// several) between lattice neighbours.
pub fn random_building<R: Rng>(rng: &mut R, rooms: usize) -> BuildingDescription {
    let materials = vec![
        MaterialDescription {
            id: 1,
            name: "concrete".into(),
            detectable_by_lidar: true,
        },
        MaterialDescription {
            id: 2,
            name: "glass".into(),
            detectable_by_lidar: false,
        },
        MaterialDescription {
            id: 3,
            name: "drywall".into(),
            detectable_by_lidar: true,
        },
    ];
    let mut slots: Vec<(i32, i32)> = (0..4).flat_map(|x| (0..2).map(move |y| (x, y))).collect();
    // shuffle so room ids do not follow the lattice order
    for i in (1..slots.len()).rev() {
        let j = rng.random_range(0..=i);
        slots.swap(i, j);
    }
    slots.truncate(rooms);
    let areas = [3.0, 49.99, 50.0, 75.0, 99.999, 100.0, 250.0];
    let ages = [0.0, 3.0 * DAY, WEEK - 1.0, WEEK, 10.0 * DAY, 2.0 * WEEK, 30.0 * DAY];
    let mut descs = Vec::new();
    for (k, &(sx, sy)) in slots.iter().enumerate() {
        let (x0, y0) = (sx as f64 * 4.0, sy as f64 * 4.0);
        let polygon = vec![
            Point2::new(x0, y0),
            Point2::new(x0 + 4.0, y0),
            Point2::new(x0 + 4.0, y0 + 4.0),
            Point2::new(x0, y0 + 4.0),
        ];
        let walls = (0..4)
            .map(|w| WallDescription {
                id: format!("R{k}-w{w}"),
                material: [1u8, 1, 1, 3, 3, 3, 2][rng.random_range(0..7)],
            })
            .collect();
        descs.push(RoomDescription {
            id: format!("R{k}"),
            name: format!("Room {k}"),
            center: Point2::new(x0 + 2.0, y0 + 2.0),
            area_m2: areas[rng.random_range(0..areas.len())],
            polygon,
            walls,
            last_scan: if rng.random_bool(0.2) {
                None
            } else {
                Some(now().plus_secs(-ages[rng.random_range(0..ages.len())]))
            },
            hazard: if rng.random_bool(0.2) {
                Hazard::High
            } else {
                Hazard::None
            },
        });
    }
    let swing = |rng: &mut R| if rng.random_bool(0.5) { Swing::Push } else { Swing::Pull };
    let mut doors = Vec::new();
    for a in 0..slots.len() {
        for b in a + 1..slots.len() {
            let (pa, pb) = (slots[a], slots[b]);
            if (pa.0 - pb.0).abs() + (pa.1 - pb.1).abs() != 1 || !rng.random_bool(0.7) {
                continue;
            }
            let copies = if rng.random_bool(0.2) { 2 } else { 1 };
            for c in 0..copies {
                let mid = if pa.0 != pb.0 {
                    Point2::new(pa.0.max(pb.0) as f64 * 4.0, pa.1 as f64 * 4.0 + 1.5 + c as f64)
                } else {
                    Point2::new(pa.0 as f64 * 4.0 + 1.5 + c as f64, pa.1.max(pb.1) as f64 * 4.0)
                };
                doors.push(DoorDescription {
                    id: format!("D{a}-{b}-{c}"),
                    rooms: [format!("R{a}"), format!("R{b}")],
                    location: mid,
                    swing: SwingDescription {
                        a_to_b: swing(rng),
                        b_to_a: swing(rng),
                    },
                    width: None,
                });
            }
        }
    }
    BuildingDescription {
        materials,
        rooms: descs,
        doors,
    }
}

/// Node weight computed straight from the weight table.
pub fn oracle_node_weight(
    room: &RoomDescription,
    desc: &BuildingDescription,
    cfg: &WeightConfig,
    now: Timestamp,
) -> f64 {
    let invisible = room.walls.iter().any(|w| {
        desc.materials
            .iter()
            .find(|m| m.id == w.material)
            .is_some_and(|m| !m.detectable_by_lidar)
    });
    let material = if invisible { cfg.w_m_invisible } else { cfg.w_m_visible };
    let area = if room.area_m2 < cfg.area_thresholds[0] {
        cfg.area_weights[0]
    } else if room.area_m2 < cfg.area_thresholds[1] {
        cfg.area_weights[1]
    } else {
        cfg.area_weights[2]
    };
    let scan = match room.last_scan {
        None => 0.0,
        Some(t) => {
            let age = now.secs() - t.secs();
            if age < cfg.scan_thresholds[0] {
                cfg.scan_weights[0]
            } else if age < cfg.scan_thresholds[1] {
                cfg.scan_weights[1]
            } else {
                cfg.scan_weights[2]
            }
        }
    };
    let hazard = if room.hazard == Hazard::High { cfg.w_h_high } else { 0.0 };
    material + area + scan + hazard
}

fn oracle_edge_weight(s: Swing, cfg: &WeightConfig) -> f64 {
    match s {
        Swing::Push => cfg.w_d_push,
        Swing::Pull => cfg.w_d_pull,
    }
}

/// Minimum weight over every simple room path from `start` to `goal`, found
/// by exhaustive depth-first enumeration.
pub fn brute_force_best(
    desc: &BuildingDescription,
    start: &str,
    goal: &str,
    cfg: &WeightConfig,
    now: Timestamp,
) -> Option<f64> {
    let w: BTreeMap<&str, f64> = desc
        .rooms
        .iter()
        .map(|r| (r.id.as_str(), oracle_node_weight(r, desc, cfg, now)))
        .collect();
    // cheapest directed door between each ordered pair
    let mut step: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for d in &desc.doors {
        let [a, b] = &d.rooms;
        for (t, h, s) in [(a, b, d.swing.a_to_b), (b, a, d.swing.b_to_a)] {
            let e = step.entry((t.as_str(), h.as_str())).or_insert(f64::INFINITY);
            *e = e.min(oracle_edge_weight(s, cfg));
        }
    }
    #[allow(clippy::too_many_arguments)]
    fn dfs<'a>(
        at: &'a str,
        goal: &str,
        on_path: &mut Vec<&'a str>,
        nodes: f64,
        edges: f64,
        w: &BTreeMap<&'a str, f64>,
        step: &BTreeMap<(&'a str, &'a str), f64>,
        best: &mut Option<f64>,
    ) {
        if at == goal {
            let total = nodes + edges;
            if best.is_none_or(|b| total < b) {
                *best = Some(total);
            }
            return;
        }
        for (&(t, h), &c) in step.range((at, "")..) {
            if t != at {
                break;
            }
            if on_path.contains(&h) {
                continue;
            }
            on_path.push(h);
            dfs(h, goal, on_path, nodes + w[h], edges + c, w, step, best);
            on_path.pop();
        }
    }
    let mut best = None;
    let start_key = *w.keys().find(|k| **k == start)?;
    dfs(
        start_key,
        goal,
        &mut vec![start_key],
        w[start_key],
        0.0,
        &w,
        &step,
        &mut best,
    );
    best
}

/// Random grid with occupied cells of random classes at the given density.
pub fn random_grid<R: Rng>(rng: &mut R, width: usize, height: usize, density: f64) -> SemanticOccupancyGrid {
    let mut g = SemanticOccupancyGrid::filled(0.1, Point2::new(0.0, 0.0), width, height, 0.05);
    for j in 0..height {
        for i in 0..width {
            if rng.random_bool(density) {
                g.set_cell(CellIndex::new(i, j), 0.95, ClassId(rng.random_range(0..4)));
            }
        }
    }
    g
}

/// Brute-force inflation: blocked iff an occupied cell centre lies within
/// `radius` metres.
pub fn oracle_blocked(grid: &SemanticOccupancyGrid, radius: f64) -> Vec<bool> {
    let occupied: Vec<Point2> = grid
        .indices()
        .filter(|c| grid.is_occupied(*c))
        .map(|c| grid.cell_center(c))
        .collect();
    grid.indices()
        .map(|c| {
            let p = grid.cell_center(c);
            occupied.iter().any(|o| o.distance(&p) <= radius + 1e-9)
        })
        .collect()
}

/// Uniform-cost search over an 8-connected grid without corner cutting.
/// Returns the optimal (straight, diagonal) step counts.
pub fn ucs(
    blocked: &[bool],
    width: usize,
    height: usize,
    start: (usize, usize),
    goal: (usize, usize),
) -> Option<(u32, u32)> {
    let idx = |i: usize, j: usize| j * width + i;
    let free = |i: i64, j: i64| {
        i >= 0 && j >= 0 && (i as usize) < width && (j as usize) < height && !blocked[idx(i as usize, j as usize)]
    };
    if !free(start.0 as i64, start.1 as i64) || !free(goal.0 as i64, goal.1 as i64) {
        return None;
    }
    // costs are a + b*sqrt(2); ordering uses the exact value via f64, ties are irrelevant
    let mut best: Vec<Option<(u32, u32)>> = vec![None; width * height];
    let mut heap = BinaryHeap::new();
    let val = |c: (u32, u32)| c.0 as f64 + c.1 as f64 * std::f64::consts::SQRT_2;
    best[idx(start.0, start.1)] = Some((0, 0));
    heap.push(Reverse((OrdF(0.0), start.0, start.1, 0u32, 0u32)));
    while let Some(Reverse((OrdF(v), i, j, s, d))) = heap.pop() {
        if best[idx(i, j)].is_some_and(|b| val(b) < v) {
            continue;
        }
        if (i, j) == goal {
            return Some((s, d));
        }
        for (di, dj) in [
            (1i64, 0i64),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ] {
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if !free(ni, nj) {
                continue;
            }
            let diag = di != 0 && dj != 0;
            if diag && !(free(i as i64 + di, j as i64) && free(i as i64, j as i64 + dj)) {
                continue;
            }
            let c = if diag { (s, d + 1) } else { (s + 1, d) };
            let k = idx(ni as usize, nj as usize);
            if best[k].is_none_or(|b| val(c) < val(b)) {
                best[k] = Some(c);
                heap.push(Reverse((OrdF(val(c)), ni as usize, nj as usize, c.0, c.1)));
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrdF(pub f64);
impl Eq for OrdF {}
impl PartialOrd for OrdF {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
