//! Odometry motion model (rotate, translate, rotate).

use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_angle, Pose2D};

/// Noise gains of the odometry model.
///
/// `a1`: rotation noise from rotation, `a2`: rotation noise from translation,
/// `a3`: translation noise from translation, `a4`: translation noise from rotation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotionNoise {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl MotionNoise {
    pub const ZERO: MotionNoise = MotionNoise {
        a1: 0.0,
        a2: 0.0,
        a3: 0.0,
        a4: 0.0,
    };

    pub fn is_valid(&self) -> bool {
        [self.a1, self.a2, self.a3, self.a4]
            .iter()
            .all(|a| *a >= 0.0 && a.is_finite())
    }
}

/// Relative motion between two poses, as reported by wheel odometry.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OdometryDelta {
    pub delta_rot1: f64,
    pub delta_trans: f64,
    pub delta_rot2: f64,
    pub alphas: MotionNoise,
}

/// Below this translation the heading of travel is undefined.
const MIN_TRANSLATION: f64 = 1e-9;

impl OdometryDelta {
    /// Exact decomposition of the motion from `prev` to `next`.
    pub fn between(prev: &Pose2D, next: &Pose2D, alphas: MotionNoise) -> Self {
        let dx = next.x - prev.x;
        let dy = next.y - prev.y;
        let trans = dx.hypot(dy);
        let rot1 = if trans < MIN_TRANSLATION {
            0.0
        } else {
            normalize_angle(dy.atan2(dx) - prev.theta)
        };
        let rot2 = normalize_angle(next.theta - prev.theta - rot1);
        OdometryDelta {
            delta_rot1: rot1,
            delta_trans: trans,
            delta_rot2: rot2,
            alphas,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.delta_rot1 == 0.0 && self.delta_trans == 0.0 && self.delta_rot2 == 0.0
    }

    /// Applies the motion without noise.
    pub fn apply(&self, pose: &Pose2D) -> Pose2D {
        apply_components(pose, self.delta_rot1, self.delta_trans, self.delta_rot2)
    }

    /// Draws perturbed motion components from the noise model.
    pub fn perturbed<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64, f64) {
        let a = &self.alphas;
        let r1 = self.delta_rot1;
        let t = self.delta_trans;
        let r2 = self.delta_rot2;
        let std_rot1 = (a.a1 * r1 * r1 + a.a2 * t * t).sqrt();
        let std_trans = (a.a3 * t * t + a.a4 * (r1 * r1 + r2 * r2)).sqrt();
        let std_rot2 = (a.a1 * r2 * r2 + a.a2 * t * t).sqrt();
        (
            r1 - gaussian(rng, std_rot1),
            t - gaussian(rng, std_trans),
            r2 - gaussian(rng, std_rot2),
        )
    }

    /// Applies the motion with noise drawn from the model.
    pub fn sample<R: Rng + ?Sized>(&self, pose: &Pose2D, rng: &mut R) -> Pose2D {
        let (r1, t, r2) = self.perturbed(rng);
        apply_components(pose, r1, t, r2)
    }

    /// The same motion with perturbed components, as a noisy odometer reports it.
    pub fn corrupted<R: Rng + ?Sized>(&self, rng: &mut R) -> OdometryDelta {
        let (r1, t, r2) = self.perturbed(rng);
        OdometryDelta {
            delta_rot1: r1,
            delta_trans: t,
            delta_rot2: r2,
            alphas: self.alphas,
        }
    }
}

fn apply_components(pose: &Pose2D, rot1: f64, trans: f64, rot2: f64) -> Pose2D {
    let heading = pose.theta + rot1;
    Pose2D::new(
        pose.x + trans * heading.cos(),
        pose.y + trans * heading.sin(),
        heading + rot2,
    )
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R, std: f64) -> f64 {
    if std == 0.0 {
        return 0.0;
    }
    let n: f64 = rng.sample(StandardNormal);
    n * std
}
