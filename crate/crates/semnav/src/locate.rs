//! Anchor-location reports from a ranging log.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use semnav_core::building::BuildingGraph;
use semnav_core::geometry::{Point2, Point3};
use semnav_core::sim::Anchor;
use semnav_core::uwb::{group_by_anchor, locate_anchor, LocateOptions, RangeObservation};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRow {
    pub anchor_id: String,
    /// `None` when the anchor was located; otherwise why it failed.
    pub failure: Option<String>,
    pub estimate: Option<Point2>,
    pub height: Option<f64>,
    pub truth: Option<Point3>,
    pub error_x: Option<f64>,
    pub error_y: Option<f64>,
    pub planar_error: Option<f64>,
    pub residual: Option<f64>,
    pub n_obs: usize,
    pub colinearity_score: Option<f64>,
    /// Room containing the estimate, when a building is given.
    pub room: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocateReport {
    pub anchors: Vec<AnchorRow>,
    /// Means over located anchors with ground truth.
    pub mean_abs_error_x: Option<f64>,
    pub mean_abs_error_y: Option<f64>,
    pub mean_planar_error: Option<f64>,
}

/// Locates every anchor in `log`. The anchor height comes from the ground
/// truth when available, else from `default_height`.
pub fn locate_report(
    log: &[RangeObservation],
    truth: &[Anchor],
    default_height: Option<f64>,
    building: Option<&BuildingGraph>,
    opts: &LocateOptions,
) -> LocateReport {
    let truth: BTreeMap<&str, Point3> = truth.iter().map(|a| (a.id.as_str(), a.position)).collect();
    let mut rows = Vec::new();
    for (id, obs) in group_by_anchor(log) {
        let known = truth.get(id.as_str()).copied();
        let height = known.map(|p| p.z).or(default_height);
        let mut row = AnchorRow {
            anchor_id: id.clone(),
            failure: None,
            estimate: None,
            height,
            truth: known,
            error_x: None,
            error_y: None,
            planar_error: None,
            residual: None,
            n_obs: 0,
            colinearity_score: None,
            room: None,
        };
        let Some(h) = height else {
            row.failure = Some("anchor height unknown".to_string());
            rows.push(row);
            continue;
        };
        match locate_anchor(&id, &obs, h, opts) {
            Ok(est) => {
                row.estimate = Some(est.position);
                row.residual = Some(est.residual);
                row.n_obs = est.n_obs;
                row.colinearity_score = Some(est.colinearity_score);
                row.room = building.and_then(|b| b.room_at(&est.position).map(|r| r.room_id.clone()));
                if let Some(t) = known {
                    row.error_x = Some(est.position.x - t.x);
                    row.error_y = Some(est.position.y - t.y);
                    row.planar_error = Some(est.position.distance(&t.planar()));
                }
            }
            Err(e) => row.failure = Some(e.to_string()),
        }
        rows.push(row);
    }
    let mean = |f: &dyn Fn(&AnchorRow) -> Option<f64>| {
        let v: Vec<f64> = rows.iter().filter_map(f).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    LocateReport {
        mean_abs_error_x: mean(&|r| r.error_x.map(f64::abs)),
        mean_abs_error_y: mean(&|r| r.error_y.map(f64::abs)),
        mean_planar_error: mean(&|r| r.planar_error),
        anchors: rows,
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

/// Fixed-width table: one row per anchor and a mean row.
pub fn render_table(report: &LocateReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>5}  status",
        "anchor", "est x", "est y", "err x", "err y", "planar", "residual", "n"
    );
    for r in &report.anchors {
        let _ = writeln!(
            s,
            "{:<10} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>5}  {}",
            r.anchor_id,
            cell(r.estimate.map(|p| p.x)),
            cell(r.estimate.map(|p| p.y)),
            cell(r.error_x),
            cell(r.error_y),
            cell(r.planar_error),
            cell(r.residual),
            r.n_obs,
            r.failure.as_deref().unwrap_or("ok"),
        );
    }
    let _ = writeln!(
        s,
        "{:<10} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "mean",
        "",
        "",
        cell(report.mean_abs_error_x),
        cell(report.mean_abs_error_y),
        cell(report.mean_planar_error),
    );
    s
}
