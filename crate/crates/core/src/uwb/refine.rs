//! Trust-region refinement of an anchor position.
//!
//! The iteration minimises the sum of squared range residuals
//! `r_i - |x - p_i|` with the anchor at its known height. A step is accepted
//! only when it lowers the squared cost and does not raise the sum of
//! absolute residuals, which is the figure reported as the residual.
//! Iterates are kept inside a box; steps that leave it are reflected back
//! off the violated bound.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::RangeObservation;
use crate::geometry::{Point2, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineOptions {
    pub max_iter: usize,
    pub initial_radius: f64,
    pub max_radius: f64,
    /// Stop when the trust radius shrinks below this, metres.
    pub x_tol: f64,
    /// Stop when the gradient norm falls below this.
    pub g_tol: f64,
    /// Minimum ratio of actual to predicted reduction for a step to count.
    pub eta: f64,
    /// Extra room around the feasible box implied by the ranges, metres.
    pub bound_margin: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            max_iter: 100,
            initial_radius: 1.0,
            max_radius: 100.0,
            x_tol: 1e-10,
            g_tol: 1e-12,
            eta: 1e-4,
            bound_margin: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineReport {
    pub position: Point2,
    /// Sum of absolute range residuals at `position`.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Absolute-residual cost after the initial guess and each accepted step.
    pub residual_history: Vec<f64>,
}

fn anchor_at(p: Point2, height: f64) -> Point3 {
    Point3::new(p.x, p.y, height)
}

/// Sum over observations of `|r_i - |x - p_i||`.
pub fn range_l1_cost(obs: &[RangeObservation], position: Point2, anchor_height: f64) -> f64 {
    let a = anchor_at(position, anchor_height);
    obs.iter()
        .map(|o| (o.range - a.distance(&o.robot_position)).abs())
        .sum()
}

struct Linearisation {
    cost: f64,
    gradient: [f64; 2],
    hessian: [[f64; 2]; 2],
}

fn linearise(obs: &[RangeObservation], x: Point2, height: f64) -> Linearisation {
    let a = anchor_at(x, height);
    let mut cost = 0.0;
    let mut g = [0.0; 2];
    let mut h = [[0.0; 2]; 2];
    for o in obs {
        let d = a.distance(&o.robot_position);
        let f = d - o.range;
        let j = if d > 0.0 {
            [(a.x - o.robot_position.x) / d, (a.y - o.robot_position.y) / d]
        } else {
            [0.0, 0.0]
        };
        cost += 0.5 * f * f;
        g[0] += j[0] * f;
        g[1] += j[1] * f;
        h[0][0] += j[0] * j[0];
        h[0][1] += j[0] * j[1];
        h[1][1] += j[1] * j[1];
    }
    h[1][0] = h[0][1];
    Linearisation {
        cost,
        gradient: g,
        hessian: h,
    }
}

fn half_squared_cost(obs: &[RangeObservation], x: Point2, height: f64) -> f64 {
    let a = anchor_at(x, height);
    obs.iter()
        .map(|o| {
            let f = a.distance(&o.robot_position) - o.range;
            0.5 * f * f
        })
        .sum()
}

fn solve_shifted(h: &[[f64; 2]; 2], g: &[f64; 2], lambda: f64) -> Option<[f64; 2]> {
    let a = h[0][0] + lambda;
    let b = h[0][1];
    let d = h[1][1] + lambda;
    let det = a * d - b * b;
    if det.abs() <= f64::EPSILON * (a.abs() * d.abs()).max(f64::MIN_POSITIVE) {
        return None;
    }
    Some([-(d * g[0] - b * g[1]) / det, -(a * g[1] - b * g[0]) / det])
}

/// Minimiser of the quadratic model inside the ball of radius `radius`.
fn trust_region_step(lin: &Linearisation, radius: f64) -> [f64; 2] {
    let norm = |p: &[f64; 2]| p[0].hypot(p[1]);
    if let Some(p) = solve_shifted(&lin.hessian, &lin.gradient, 0.0) {
        if norm(&p) <= radius {
            return p;
        }
    }
    // |p(lambda)| decreases in lambda; at hi it is at most |g| / hi = radius
    let g_norm = norm(&lin.gradient);
    let mut lo = 0.0;
    let mut hi = g_norm / radius + 1e-300;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match solve_shifted(&lin.hessian, &lin.gradient, mid) {
            Some(p) if norm(&p) > radius => lo = mid,
            _ => hi = mid,
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    solve_shifted(&lin.hessian, &lin.gradient, hi).unwrap_or([0.0, 0.0])
}

fn reflect_into(value: f64, lo: f64, hi: f64) -> f64 {
    let mut v = value;
    if v > hi {
        v = 2.0 * hi - v;
    }
    if v < lo {
        v = 2.0 * lo - v;
    }
    v.clamp(lo, hi)
}

/// Box that must contain the anchor: within every range of each robot position.
fn feasible_box(obs: &[RangeObservation], margin: f64, around: Point2) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut hi = Point2::new(f64::INFINITY, f64::INFINITY);
    for o in obs {
        let p = o.robot_position;
        lo = Point2::new(lo.x.max(p.x - o.range), lo.y.max(p.y - o.range));
        hi = Point2::new(hi.x.min(p.x + o.range), hi.y.min(p.y + o.range));
    }
    lo = Point2::new(lo.x - margin, lo.y - margin);
    hi = Point2::new(hi.x + margin, hi.y + margin);
    // never exclude the starting point
    (
        Point2::new(lo.x.min(around.x), lo.y.min(around.y)),
        Point2::new(hi.x.max(around.x), hi.y.max(around.y)),
    )
}

/// Refines `initial` with default options.
pub fn refine(obs: &[RangeObservation], initial: Point2, anchor_height: f64) -> RefineReport {
    refine_with(obs, initial, anchor_height, &RefineOptions::default())
}

pub fn refine_with(
    obs: &[RangeObservation],
    initial: Point2,
    anchor_height: f64,
    opts: &RefineOptions,
) -> RefineReport {
    let (lo, hi) = feasible_box(obs, opts.bound_margin, initial);
    let mut x = initial;
    let mut l1 = range_l1_cost(obs, x, anchor_height);
    let mut history = alloc::vec![l1];
    let mut radius = opts.initial_radius;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let lin = linearise(obs, x, anchor_height);
        if lin.gradient[0].hypot(lin.gradient[1]) <= opts.g_tol || lin.cost == 0.0 {
            converged = true;
            break;
        }
        if radius <= opts.x_tol * (1.0 + x.norm()) {
            converged = true;
            break;
        }
        iterations += 1;

        let p = trust_region_step(&lin, radius);
        let trial = Point2::new(
            reflect_into(x.x + p[0], lo.x, hi.x),
            reflect_into(x.y + p[1], lo.y, hi.y),
        );
        let step = [trial.x - x.x, trial.y - x.y];
        let h = &lin.hessian;
        let predicted = -(lin.gradient[0] * step[0]
            + lin.gradient[1] * step[1]
            + 0.5
                * (step[0] * (h[0][0] * step[0] + h[0][1] * step[1])
                    + step[1] * (h[1][0] * step[0] + h[1][1] * step[1])));
        let actual = lin.cost - half_squared_cost(obs, trial, anchor_height);
        let rho = if predicted > 0.0 { actual / predicted } else { -1.0 };
        let trial_l1 = range_l1_cost(obs, trial, anchor_height);
        let step_norm = step[0].hypot(step[1]);

        if rho > opts.eta && trial_l1 <= l1 {
            x = trial;
            l1 = trial_l1;
            history.push(l1);
            if rho > 0.75 && step_norm >= 0.99 * radius {
                radius = (2.0 * radius).min(opts.max_radius);
            } else if rho < 0.25 {
                radius *= 0.25;
            }
        } else {
            radius = 0.25 * step_norm.min(radius);
        }
    }

    RefineReport {
        position: x,
        residual: l1,
        converged,
        iterations,
        residual_history: history,
    }
}
