//! Localization of static UWB anchors from known robot positions.
//!
//! Pipeline per anchor: pick well-spaced observations, check that their
//! positions are not colinear, solve the linearised trilateration system in
//! closed form, then refine with a trust-region least-squares iteration.

mod refine;
mod trilaterate;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point2, Point3};

pub use refine::{range_l1_cost, refine, refine_with, RefineOptions, RefineReport};
pub use trilaterate::trilaterate;

/// Default tag height on the robot, metres.
pub const DEFAULT_TAG_HEIGHT: f64 = 0.78;
/// Default spacing between consecutive observations, metres.
pub const DEFAULT_MIN_SPACING: f64 = 0.10;
/// Default number of observations per anchor.
pub const DEFAULT_TARGET_COUNT: usize = 70;
/// Observation sets scoring below this are rejected as colinear.
pub const COLINEARITY_THRESHOLD: f64 = 0.05;

/// Spacing comparisons tolerate this much floating-point slack.
const SPACING_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeObservation {
    pub t: f64,
    pub anchor_id: String,
    #[serde(rename = "robot")]
    pub robot_position: Point3,
    pub range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorEstimate {
    pub anchor_id: String,
    pub position: Point2,
    /// Known anchor height, metres.
    pub height: f64,
    /// Sum of absolute range residuals at the solution, metres.
    pub residual: f64,
    pub n_obs: usize,
    pub colinearity_score: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UwbError {
    #[error("need at least 3 observations, got {0}")]
    TooFewObservations(usize),
    #[error("robot positions are colinear (score {score:.4})")]
    Colinear { score: f64 },
    #[error("trilateration system is singular (colinearity score {score:.4})")]
    Singular { score: f64 },
}

/// Greedy spacing filter: keeps an observation when it lies at least
/// `min_spacing` (inclusive) from the last kept one, until `target` are kept.
pub fn select_observations(stream: &[RangeObservation], min_spacing: f64, target: usize) -> Vec<RangeObservation> {
    let mut kept: Vec<RangeObservation> = Vec::new();
    for obs in stream {
        if kept.len() >= target {
            break;
        }
        let far_enough = kept.last().is_none_or(|last| {
            last.robot_position.planar().distance(&obs.robot_position.planar()) >= min_spacing - SPACING_SLACK
        });
        if far_enough {
            kept.push(obs.clone());
        }
    }
    kept
}

/// Ratio of the smaller to the larger singular value of the mean-centred
/// planar robot positions: 0 for a line, 1 for an isotropic spread.
pub fn colinearity_check(obs: &[RangeObservation]) -> Result<f64, UwbError> {
    if obs.len() < 3 {
        return Err(UwbError::TooFewObservations(obs.len()));
    }
    let n = obs.len() as f64;
    let (mx, my) = obs.iter().fold((0.0, 0.0), |(x, y), o| {
        (x + o.robot_position.x / n, y + o.robot_position.y / n)
    });
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for o in obs {
        let dx = o.robot_position.x - mx;
        let dy = o.robot_position.y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // eigenvalues of the 2x2 scatter matrix are the squared singular values
    let half_trace = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy).sqrt();
    let big = half_trace + disc;
    let small = (half_trace - disc).max(0.0);
    if big <= 0.0 {
        return Ok(0.0);
    }
    Ok((small / big).sqrt())
}

/// Options for the per-anchor pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocateOptions {
    pub min_spacing: f64,
    pub target_count: usize,
    pub colinearity_threshold: f64,
    pub refine: RefineOptions,
}

impl Default for LocateOptions {
    fn default() -> Self {
        LocateOptions {
            min_spacing: DEFAULT_MIN_SPACING,
            target_count: DEFAULT_TARGET_COUNT,
            colinearity_threshold: COLINEARITY_THRESHOLD,
            refine: RefineOptions::default(),
        }
    }
}

/// Runs selection, colinearity gating, trilateration and refinement for one
/// anchor. `observations` must all belong to that anchor and be time-sorted.
pub fn locate_anchor(
    anchor_id: &str,
    observations: &[RangeObservation],
    anchor_height: f64,
    opts: &LocateOptions,
) -> Result<AnchorEstimate, UwbError> {
    let selected = select_observations(observations, opts.min_spacing, opts.target_count);
    let score = colinearity_check(&selected)?;
    if score < opts.colinearity_threshold {
        return Err(UwbError::Colinear { score });
    }
    let initial = trilaterate(&selected, anchor_height)?;
    let report = refine_with(&selected, initial, anchor_height, &opts.refine);
    Ok(AnchorEstimate {
        anchor_id: String::from(anchor_id),
        position: report.position,
        height: anchor_height,
        residual: report.residual,
        n_obs: selected.len(),
        colinearity_score: score,
        converged: report.converged,
        iterations: report.iterations,
    })
}

/// Splits a mixed ranging log by anchor, each group sorted by time.
pub fn group_by_anchor(log: &[RangeObservation]) -> BTreeMap<String, Vec<RangeObservation>> {
    let mut groups: BTreeMap<String, Vec<RangeObservation>> = BTreeMap::new();
    for o in log {
        groups.entry(o.anchor_id.clone()).or_default().push(o.clone());
    }
    for g in groups.values_mut() {
        g.sort_by(|a, b| a.t.total_cmp(&b.t));
    }
    groups
}
