use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use semnav::files::{load_building, read_json, write_json};
use semnav::grid_file::export_grid;
use semnav::jsonl::read_jsonl;
use semnav::locate::{locate_report, render_table};
use semnav::scenario::{load_scenario, run_scenario};
use semnav::service::{serve, AppState, ServiceConfig};
use semnav_core::building::rasterize;
use semnav_core::sim::{Anchor, MissionStatus};
use semnav_core::uwb::{LocateOptions, RangeObservation};

#[derive(Parser)]
#[command(name = "semnav", version, about = "Semantic navigation simulator and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario headless and write its logs.
    RunScenario {
        scenario: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Locate UWB anchors from a JSON-lines ranging log.
    LocateAnchors {
        log: PathBuf,
        /// Building file; the report names the room of each estimate.
        #[arg(long)]
        building: Option<PathBuf>,
        /// JSON list of anchors with true positions, for error columns and heights.
        #[arg(long)]
        ground_truth: Option<PathBuf>,
        /// Anchor height for anchors missing from the ground truth, metres.
        #[arg(long)]
        anchor_height: Option<f64>,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rasterize a building into <prefix>.pgm and <prefix>.json.
    ExportGrid {
        building: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        resolution: f64,
        #[arg(long, default_value = "map")]
        out: PathBuf,
    },
    /// Serve the operator-console API.
    Serve {
        /// Scenario supplying building, start pose, anchors, weights and seed.
        #[arg(long, conflicts_with = "building", required_unless_present = "building")]
        scenario: Option<PathBuf>,
        /// Building file; the robot starts at the centre of the first room.
        #[arg(long)]
        building: Option<PathBuf>,
        #[arg(long, env = "SEMNAV_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "SEMNAV_SEED")]
        seed: Option<u64>,
        /// Simulation speed relative to real time.
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::RunScenario { scenario, seed, out } => {
            let summary = run_scenario(&scenario, seed, &out).map_err(|e| e.to_string())?;
            for (k, leg) in summary.legs.iter().enumerate() {
                println!(
                    "leg {k}: {} -> {}: {} (weight {})",
                    leg.start_room,
                    leg.goal,
                    leg.rooms.join(" > "),
                    leg.total_weight
                );
                for w in &leg.warnings {
                    println!("  warning: room {} ({:?}, weight {})", w.room_id, w.reason, w.weight);
                }
            }
            println!(
                "{:?} after {} ticks ({:.1} s); logs in {}",
                summary.status,
                summary.ticks,
                summary.duration_s,
                out.display()
            );
            if let Some(e) = &summary.error {
                eprintln!("mission failed: {e}");
            }
            Ok(if summary.status == MissionStatus::Succeeded {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::LocateAnchors {
            log,
            building,
            ground_truth,
            anchor_height,
            out,
        } => {
            let obs: Vec<RangeObservation> = read_jsonl(&log).map_err(|e| e.to_string())?;
            let truth: Vec<Anchor> = match &ground_truth {
                Some(p) => read_json(p).map_err(|e| e.to_string())?,
                None => Vec::new(),
            };
            let graph = building
                .as_deref()
                .map(load_building)
                .transpose()
                .map_err(|e| e.to_string())?;
            let report = locate_report(&obs, &truth, anchor_height, graph.as_ref(), &LocateOptions::default());
            print!("{}", render_table(&report));
            if let Some(p) = out {
                write_json(&p, &report).map_err(|e| format!("{}: {e}", p.display()))?;
            }
            let all_ok = report.anchors.iter().all(|r| r.failure.is_none());
            Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::ExportGrid {
            building,
            resolution,
            out,
        } => {
            let graph = load_building(&building).map_err(|e| e.to_string())?;
            let grid = rasterize(&graph, resolution).map_err(|e| e.to_string())?;
            let (pgm, json) = export_grid(&grid, &out).map_err(|e| e.to_string())?;
            println!("wrote {} and {}", pgm.display(), json.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve {
            scenario,
            building,
            port,
            seed,
            speed,
        } => {
            let (graph, cfg) = service_setup(scenario.as_deref(), building.as_deref(), seed, speed)?;
            let state = AppState::new(graph, cfg).map_err(|e| e.to_string())?;
            let addr = SocketAddr::from(([0, 0, 0, 0], port));
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            eprintln!("listening on {addr}");
            rt.block_on(serve(state, addr)).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn service_setup(
    scenario: Option<&Path>,
    building: Option<&Path>,
    seed: Option<u64>,
    speed: f64,
) -> Result<(semnav_core::BuildingGraph, ServiceConfig), String> {
    let (graph, mut cfg) = if let Some(path) = scenario {
        let loaded = load_scenario(path).map_err(|e| e.to_string())?;
        let cfg = ServiceConfig::from_scenario(&loaded, speed).map_err(|e| e.to_string())?;
        (loaded.graph, cfg)
    } else {
        let path = building.ok_or("either --scenario or --building is required")?;
        let graph = load_building(path).map_err(|e| e.to_string())?;
        let cfg = ServiceConfig::for_building(&graph, speed).ok_or("building has no rooms")?;
        (graph, cfg)
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok((graph, cfg))
}
