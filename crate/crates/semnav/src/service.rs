//! HTTP service for the operator console.
//!
//! Reads: `GET /building`, `/map`, `/rooms`, `/weights`, `/status`.
//! Commands: `PUT /weights`, `POST /plan`, `POST /move`, `POST /stop`.
//! `GET /telemetry` streams tick events as server-sent events.
//!
//! Commands are serialized through one mission slot: planning or moving
//! while a mission runs answers 409. Unknown rooms answer 404 and invalid
//! weights 422. Every body is JSON.

use std::convert::Infallible;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use axum::extract::{FromRequest, Request, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semnav_core::building::{node_weight, BuildingDescription, BuildingGraph, Hazard, WeightConfig};
use semnav_core::geometry::{Point2, Pose2D};
use semnav_core::grid::SemanticOccupancyGrid;
use semnav_core::planner::{plan, PlanError, SemanticPath};
use semnav_core::sim::{Anchor, MissionConfig, MissionRunner, MissionStatus, TickEvent};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::broadcast;

use crate::grid_file::GridSnapshot;
use crate::scenario::{LoadedScenario, ScenarioError};

/// Telemetry events buffered per subscriber before it starts lagging.
const TELEMETRY_BUFFER: usize = 8192;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub mission: MissionConfig,
    pub initial_pose: Pose2D,
    pub anchors: Vec<Anchor>,
    /// Ground truth; the rasterized building when `None`.
    pub truth: Option<SemanticOccupancyGrid>,
    pub seed: u64,
    /// Simulation speed relative to wall-clock time.
    pub speed: f64,
}

impl ServiceConfig {
    /// Configuration taken from a loaded scenario file.
    pub fn from_scenario(loaded: &LoadedScenario, speed: f64) -> Result<Self, ScenarioError> {
        Ok(ServiceConfig {
            mission: loaded.mission_config(),
            initial_pose: loaded.scenario.initial_pose,
            anchors: loaded.scenario.anchors.clone(),
            truth: Some(loaded.truth_grid()?),
            seed: loaded.scenario.seed,
            speed,
        })
    }

    /// Defaults for a bare building: start at the centre of its first room.
    pub fn for_building(graph: &BuildingGraph, speed: f64) -> Option<Self> {
        let first = graph.nodes().values().next()?;
        Some(ServiceConfig {
            mission: MissionConfig::default(),
            initial_pose: Pose2D::new(first.center.x, first.center.y, 0.0),
            anchors: Vec::new(),
            truth: None,
            seed: 0,
            speed,
        })
    }
}

struct Robot {
    graph: BuildingGraph,
    weights: WeightConfig,
    pose: Pose2D,
    /// Simulated seconds elapsed over all missions so far.
    clock: f64,
    last_plan: Option<(String, SemanticPath)>,
    moving: bool,
    stop: Arc<AtomicBool>,
    map: GridSnapshot,
    map_version: u64,
    missions: u64,
    last_status: Option<MissionStatus>,
}

pub struct AppState {
    cfg: ServiceConfig,
    robot: Mutex<Robot>,
    telemetry: broadcast::Sender<TickEvent>,
}

impl AppState {
    pub fn new(graph: BuildingGraph, cfg: ServiceConfig) -> Result<Arc<Self>, semnav_core::building::RasterError> {
        let grid = semnav_core::building::rasterize(&graph, cfg.mission.resolution)?;
        let (telemetry, _) = broadcast::channel(TELEMETRY_BUFFER);
        Ok(Arc::new(AppState {
            robot: Mutex::new(Robot {
                weights: cfg.mission.weights,
                pose: cfg.initial_pose,
                graph,
                clock: 0.0,
                last_plan: None,
                moving: false,
                stop: Arc::new(AtomicBool::new(false)),
                map: GridSnapshot::of(&grid),
                map_version: 0,
                missions: 0,
                last_status: None,
            }),
            telemetry,
            cfg,
        }))
    }

    fn robot(&self) -> MutexGuard<'_, Robot> {
        self.robot.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// A receiver for tick events, as `/telemetry` uses.
    pub fn subscribe(&self) -> broadcast::Receiver<TickEvent> {
        self.telemetry.subscribe()
    }
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

/// `Json` whose rejections are JSON error bodies too.
pub struct JsonBody<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for JsonBody<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(JsonBody(v)),
            Err(e) => Err(ApiError(e.status(), e.body_text())),
        }
    }
}

fn conflict(msg: &str) -> ApiError {
    ApiError(StatusCode::CONFLICT, msg.to_string())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/building", get(get_building))
        .route("/map", get(get_map))
        .route("/rooms", get(get_rooms))
        .route("/weights", get(get_weights).put(put_weights))
        .route("/status", get(get_status))
        .route("/plan", post(post_plan))
        .route("/move", post(post_move))
        .route("/stop", post(post_stop))
        .route("/telemetry", get(get_telemetry))
        .with_state(state)
}

async fn get_building(State(s): State<Arc<AppState>>) -> Json<BuildingDescription> {
    Json(s.robot().graph.to_description())
}

#[derive(Serialize)]
struct MapResponse {
    version: u64,
    #[serde(flatten)]
    grid: GridSnapshot,
}

async fn get_map(State(s): State<Arc<AppState>>) -> Json<MapResponse> {
    let r = s.robot();
    Json(MapResponse {
        version: r.map_version,
        grid: r.map.clone(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoomInfo {
    pub room_id: String,
    pub name: String,
    pub center: Point2,
    pub area: f64,
    pub materials: Vec<String>,
    /// Seconds since the last scan; `None` if never scanned.
    pub scan_age_s: Option<f64>,
    pub hazard: Hazard,
    pub node_weight: f64,
}

async fn get_rooms(State(s): State<Arc<AppState>>) -> Json<Vec<RoomInfo>> {
    let r = s.robot();
    let now = s.cfg.mission.start_time.plus_secs(r.clock);
    let rooms = r
        .graph
        .nodes()
        .values()
        .map(|room| {
            let mut materials: Vec<String> = room
                .wall_materials()
                .filter_map(|id| r.graph.material(id).map(|m| m.name.clone()))
                .collect();
            materials.sort();
            materials.dedup();
            RoomInfo {
                room_id: room.room_id.clone(),
                name: room.name.clone(),
                center: room.center,
                area: room.area,
                materials,
                scan_age_s: room.last_scan.map(|t| now.since(t)),
                hazard: room.hazard,
                node_weight: node_weight(room, r.graph.materials(), &r.weights, now),
            }
        })
        .collect();
    Json(rooms)
}

async fn get_weights(State(s): State<Arc<AppState>>) -> Json<WeightConfig> {
    Json(s.robot().weights)
}

async fn put_weights(
    State(s): State<Arc<AppState>>,
    JsonBody(w): JsonBody<WeightConfig>,
) -> Result<Json<WeightConfig>, ApiError> {
    w.validate()
        .map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    s.robot().weights = w;
    Ok(Json(w))
}

#[derive(Serialize)]
struct StatusResponse {
    moving: bool,
    pose: Pose2D,
    room: Option<String>,
    clock: f64,
    missions: u64,
    last_status: Option<MissionStatus>,
    last_plan: Option<SemanticPath>,
}

async fn get_status(State(s): State<Arc<AppState>>) -> Json<StatusResponse> {
    let r = s.robot();
    Json(StatusResponse {
        moving: r.moving,
        pose: r.pose,
        room: r.graph.room_at(&r.pose.position()).map(|x| x.room_id.clone()),
        clock: r.clock,
        missions: r.missions,
        last_status: r.last_status,
        last_plan: r.last_plan.as_ref().map(|(_, p)| p.clone()),
    })
}

#[derive(Debug, Deserialize)]
pub struct PlanRequest {
    pub goal_room: String,
}

async fn post_plan(
    State(s): State<Arc<AppState>>,
    JsonBody(req): JsonBody<PlanRequest>,
) -> Result<Json<SemanticPath>, ApiError> {
    let mut r = s.robot();
    if r.moving {
        return Err(conflict("a mission is in progress"));
    }
    let start = r
        .graph
        .room_at(&r.pose.position())
        .map(|x| x.room_id.clone())
        .ok_or_else(|| conflict("robot is not inside any room"))?;
    let now = s.cfg.mission.start_time.plus_secs(r.clock);
    let path = plan(&r.graph, &start, &req.goal_room, &r.weights, now).map_err(|e| match e {
        PlanError::UnknownRoom(_) => ApiError(StatusCode::NOT_FOUND, e.to_string()),
        other => ApiError(StatusCode::UNPROCESSABLE_ENTITY, other.to_string()),
    })?;
    r.last_plan = Some((req.goal_room, path.clone()));
    Ok(Json(path))
}

async fn post_move(State(s): State<Arc<AppState>>) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let mut r = s.robot();
    if r.moving {
        return Err(conflict("a mission is in progress"));
    }
    let (goal, _) = r
        .last_plan
        .clone()
        .ok_or_else(|| conflict("no plan to execute; POST /plan first"))?;
    let mut cfg = s.cfg.mission.clone();
    cfg.weights = r.weights;
    cfg.start_time = s.cfg.mission.start_time.plus_secs(r.clock);
    let runner = MissionRunner::new(
        r.graph.clone(),
        s.cfg.truth.clone(),
        r.pose,
        s.cfg.anchors.clone(),
        vec![goal.clone()],
        cfg,
        ChaCha8Rng::seed_from_u64(s.cfg.seed.wrapping_add(r.missions)),
    )
    .map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    r.moving = true;
    r.missions += 1;
    r.stop = Arc::new(AtomicBool::new(false));
    let stop = r.stop.clone();
    let offset = r.clock;
    drop(r);
    tokio::spawn(drive(s.clone(), runner, stop, offset));
    Ok((StatusCode::ACCEPTED, Json(json!({ "goal": goal }))))
}

/// Ticks the mission at the configured pace and publishes telemetry.
async fn drive(s: Arc<AppState>, mut runner: MissionRunner<ChaCha8Rng>, stop: Arc<AtomicBool>, offset: f64) {
    let period = Duration::from_secs_f64(s.cfg.mission.dt / s.cfg.speed.max(1e-6));
    let mut interval = tokio::time::interval(period);
    let mut version = runner.map_version();
    while !stop.load(Ordering::SeqCst) {
        interval.tick().await;
        let Some(mut ev) = runner.tick() else { break };
        ev.t += offset;
        if runner.map_version() != version {
            version = runner.map_version();
            let mut r = s.robot();
            r.map = GridSnapshot::of(runner.belief());
            r.map_version += 1;
        }
        // no subscribers is fine
        let _ = s.telemetry.send(ev);
    }
    let mut r = s.robot();
    r.moving = false;
    r.pose = runner.world().true_pose;
    r.clock = offset + runner.world().time;
    r.graph = runner.graph().clone();
    r.last_status = Some(runner.status());
}

async fn post_stop(State(s): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let r = s.robot();
    let was_moving = r.moving;
    r.stop.store(true, Ordering::SeqCst);
    Json(json!({ "stopped": was_moving }))
}

async fn get_telemetry(State(s): State<Arc<AppState>>) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let rx = s.subscribe();
    let stream = futures::stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(ev) => {
                    let event = Event::default()
                        .id(ev.tick.to_string())
                        .json_data(&ev)
                        .unwrap_or_else(|_| Event::default().comment("unserializable event"));
                    return Some((Ok(event), rx));
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    Sse::new(stream).keep_alive(KeepAlive::default())
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(state: Arc<AppState>, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}
