//! Scenario files and headless mission runs.
//!
//! ```json
//! { "building": "four_room.json",
//!   "initial_pose": {"x": 2.0, "y": 4.0, "theta": 0.0},
//!   "missions": ["E", "W"],
//!   "seed": 7,
//!   "start_time": "2026-06-01T00:00:00Z",
//!   "anchors": [{"id": "A1", "position": {"x": 1.0, "y": 7.0, "z": 1.9}}],
//!   "weights": {"w_h_high": 0},
//!   "hazards": {"N": "high"},
//!   "extra_obstacles": [{"min": {"x": 6.0, "y": 6.0}, "max": {"x": 6.4, "y": 7.0}}],
//!   "config": {"particles": 200} }
//! ```
//!
//! The building path is relative to the scenario file. Every field after
//! `missions` is optional; `weights` and `config` may name only the fields
//! they change.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semnav_core::building::{rasterize, BuildingGraph, Hazard, RasterError, WeightConfig};
use semnav_core::geometry::{Point2, Pose2D};
use semnav_core::grid::{ClassId, SemanticOccupancyGrid, P_OCCUPIED_PRIOR};
use semnav_core::planner::PathWarning;
use semnav_core::sim::{Anchor, MissionConfig, MissionError, MissionRunner, MissionStatus};
use semnav_core::time::Timestamp;
use semnav_core::uwb::LocateOptions;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::files::{load_building, read_json, write_json, LoadError};
use crate::grid_file::export_grid;
use crate::jsonl::{write_jsonl, JsonLinesWriter};
use crate::locate::{locate_report, LocateReport};

/// Axis-aligned box added to the ground truth but not to the building model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub min: Point2,
    pub max: Point2,
    #[serde(default)]
    pub class: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub building: PathBuf,
    pub initial_pose: Pose2D,
    pub missions: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub start_time: Option<Timestamp>,
    #[serde(default)]
    pub anchors: Vec<Anchor>,
    #[serde(default)]
    pub weights: Option<WeightConfig>,
    #[serde(default)]
    pub hazards: BTreeMap<String, Hazard>,
    #[serde(default)]
    pub extra_obstacles: Vec<Obstacle>,
    #[serde(default)]
    pub config: MissionConfig,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("hazard override names unknown room {0:?}")]
    UnknownRoom(String),
    #[error("rasterizing ground truth: {0}")]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Mission(#[from] MissionError),
    #[error("writing {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
}

/// A scenario with its building loaded and overrides applied.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub graph: BuildingGraph,
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario, ScenarioError> {
    let scenario: Scenario = read_json(path)?;
    let building = path.parent().unwrap_or(Path::new(".")).join(&scenario.building);
    let mut graph = load_building(&building)?;
    for (room, hazard) in &scenario.hazards {
        graph = graph
            .with_hazard(room, *hazard)
            .map_err(|_| ScenarioError::UnknownRoom(room.clone()))?;
    }
    Ok(LoadedScenario { scenario, graph })
}

impl LoadedScenario {
    pub fn mission_config(&self) -> MissionConfig {
        let mut cfg = self.scenario.config.clone();
        if let Some(w) = self.scenario.weights {
            cfg.weights = w;
        }
        if let Some(t) = self.scenario.start_time {
            cfg.start_time = t;
        }
        cfg
    }

    /// Rasterized building plus the extra obstacles.
    pub fn truth_grid(&self) -> Result<SemanticOccupancyGrid, ScenarioError> {
        let mut grid = rasterize(&self.graph, self.mission_config().resolution)?;
        for ob in &self.scenario.extra_obstacles {
            let cells: Vec<_> = grid
                .indices()
                .filter(|c| {
                    let p = grid.cell_center(*c);
                    p.x >= ob.min.x && p.x <= ob.max.x && p.y >= ob.min.y && p.y <= ob.max.y
                })
                .collect();
            for c in cells {
                grid.set_cell(c, P_OCCUPIED_PRIOR, ClassId(ob.class));
            }
        }
        Ok(grid)
    }

    pub fn runner(&self, seed: u64) -> Result<MissionRunner<ChaCha8Rng>, ScenarioError> {
        Ok(MissionRunner::new(
            self.graph.clone(),
            Some(self.truth_grid()?),
            self.scenario.initial_pose,
            self.scenario.anchors.clone(),
            self.scenario.missions.clone(),
            self.mission_config(),
            ChaCha8Rng::seed_from_u64(seed),
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegSummary {
    pub goal: String,
    pub start_room: String,
    pub rooms: Vec<String>,
    pub total_weight: f64,
    pub warnings: Vec<PathWarning>,
    pub visited: Vec<String>,
    pub started_at: f64,
    pub finished_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingSummary {
    pub mean_error: f64,
    pub max_error: f64,
    /// Fraction of ticks with position error within three grid cells.
    pub within_3_cells: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub seed: u64,
    pub status: MissionStatus,
    pub error: Option<String>,
    pub ticks: u64,
    pub duration_s: f64,
    pub collisions: u64,
    pub map_version: u64,
    pub legs: Vec<LegSummary>,
    pub tracking: TrackingSummary,
    pub uwb: Option<LocateReport>,
}

fn output<T>(path: &Path, r: io::Result<T>) -> Result<T, ScenarioError> {
    r.map_err(|source| ScenarioError::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs a scenario headless and writes its logs to `out`:
/// `telemetry.jsonl`, `leg_<k>.json` per leg, `ranging.jsonl`,
/// `uwb_report.json` (when the scenario has anchors), `map.pgm`/`map.json`
/// and `summary.json`.
pub fn run_scenario(path: &Path, seed: Option<u64>, out: &Path) -> Result<ScenarioSummary, ScenarioError> {
    let loaded = load_scenario(path)?;
    let seed = seed.unwrap_or(loaded.scenario.seed);
    let mut runner = loaded.runner(seed)?;
    output(out, fs::create_dir_all(out))?;

    let telemetry_path = out.join("telemetry.jsonl");
    let mut telemetry = output(&telemetry_path, JsonLinesWriter::create(&telemetry_path))?;
    let resolution = loaded.mission_config().resolution;
    let (mut ticks, mut collisions, mut within, mut sum, mut max) = (0u64, 0u64, 0u64, 0.0, 0.0f64);
    let mut write_err = None;
    runner.run(|ev| {
        ticks += 1;
        collisions += u64::from(ev.collision);
        sum += ev.position_error;
        max = max.max(ev.position_error);
        within += u64::from(ev.position_error <= 3.0 * resolution);
        if write_err.is_none() {
            write_err = telemetry.write(ev).err();
        }
    });
    if let Some(e) = write_err {
        return Err(ScenarioError::Output {
            path: telemetry_path,
            source: e,
        });
    }
    output(&telemetry_path, telemetry.finish())?;

    let mut legs = Vec::new();
    for (k, leg) in runner.legs().iter().enumerate() {
        let p = out.join(format!("leg_{k}.json"));
        output(&p, write_json(&p, leg))?;
        legs.push(LegSummary {
            goal: leg.goal.clone(),
            start_room: leg.start_room.clone(),
            rooms: leg.plan.rooms().map(str::to_string).collect(),
            total_weight: leg.plan.total_weight,
            warnings: leg.plan.warnings.clone(),
            visited: leg.visited.clone(),
            started_at: leg.started_at,
            finished_at: leg.finished_at,
        });
    }

    let ranging_path = out.join("ranging.jsonl");
    output(&ranging_path, write_jsonl(&ranging_path, runner.ranging()))?;
    let uwb = (!loaded.scenario.anchors.is_empty()).then(|| {
        locate_report(
            runner.ranging(),
            &loaded.scenario.anchors,
            None,
            Some(&loaded.graph),
            &LocateOptions::default(),
        )
    });
    if let Some(report) = &uwb {
        let p = out.join("uwb_report.json");
        output(&p, write_json(&p, report))?;
    }
    let map_prefix = out.join("map");
    output(&map_prefix, export_grid(runner.belief(), &map_prefix))?;

    let summary = ScenarioSummary {
        seed,
        status: runner.status(),
        error: runner.error().map(ToString::to_string),
        ticks,
        duration_s: runner.world().time,
        collisions,
        map_version: runner.map_version(),
        legs,
        tracking: TrackingSummary {
            mean_error: if ticks > 0 { sum / ticks as f64 } else { 0.0 },
            max_error: max,
            within_3_cells: if ticks > 0 { within as f64 / ticks as f64 } else { 1.0 },
        },
        uwb,
    };
    let p = out.join("summary.json");
    output(&p, write_json(&p, &summary))?;
    Ok(summary)
}
