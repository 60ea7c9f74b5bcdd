//! Four-component beam measurement model.

use core::f64::consts::{PI, SQRT_2};

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::grid::ClassMask;

/// Densities are floored here so that log-likelihoods stay finite.
pub const MIN_DENSITY: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeamModelParams {
    pub z_hit: f64,
    pub z_short: f64,
    pub z_max_w: f64,
    pub z_rand: f64,
    /// Standard deviation of the hit component, metres.
    pub sigma_hit: f64,
    /// Rate of the short-reading exponential, 1/m.
    pub lambda_short: f64,
    /// Width of the top-of-range bin that carries the max-range mass, metres.
    pub max_bin: f64,
    /// Classes the sensor detects; everything else is transparent to it.
    #[serde(skip, default = "ClassMask::all")]
    pub sensor_class_mask: ClassMask,
}

impl Default for BeamModelParams {
    fn default() -> Self {
        BeamModelParams {
            z_hit: 0.8,
            z_short: 0.05,
            z_max_w: 0.05,
            z_rand: 0.10,
            sigma_hit: 0.1,
            lambda_short: 1.0,
            max_bin: 0.05,
            sensor_class_mask: ClassMask::all(),
        }
    }
}

impl BeamModelParams {
    pub fn with_mask(mut self, mask: ClassMask) -> Self {
        self.sensor_class_mask = mask;
        self
    }

    pub fn weights_sum(&self) -> f64 {
        self.z_hit + self.z_short + self.z_max_w + self.z_rand
    }

    /// Mixture weights are non-negative and sum to one; scale parameters positive.
    pub fn is_valid(&self) -> bool {
        let w = [self.z_hit, self.z_short, self.z_max_w, self.z_rand];
        w.iter().all(|v| *v >= 0.0)
            && (self.weights_sum() - 1.0).abs() < 1e-9
            && self.sigma_hit > 0.0
            && self.lambda_short > 0.0
            && self.max_bin > 0.0
    }
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / SQRT_2))
}

/// Gaussian around `z_star`, truncated and renormalised over [0, z_max].
pub fn hit_density(z: f64, z_star: f64, sigma: f64, z_max: f64) -> f64 {
    if !(0.0..=z_max).contains(&z) {
        return 0.0;
    }
    let eta = std_normal_cdf((z_max - z_star) / sigma) - std_normal_cdf(-z_star / sigma);
    if eta <= 0.0 {
        return 0.0;
    }
    let u = (z - z_star) / sigma;
    (-0.5 * u * u).exp() / (sigma * (2.0 * PI).sqrt()) / eta
}

/// Exponential on [0, z_star], renormalised over that interval.
pub fn short_density(z: f64, z_star: f64, lambda: f64) -> f64 {
    if z < 0.0 || z > z_star || z_star <= 0.0 {
        return 0.0;
    }
    let eta = 1.0 - (-lambda * z_star).exp();
    lambda * (-lambda * z).exp() / eta
}

/// Max-range mass spread uniformly over the last `bin` metres of the range.
pub fn max_density(z: f64, z_max: f64, bin: f64) -> f64 {
    if z >= z_max - bin && z <= z_max {
        1.0 / bin
    } else {
        0.0
    }
}

pub fn rand_density(z: f64, z_max: f64) -> f64 {
    if (0.0..=z_max).contains(&z) {
        1.0 / z_max
    } else {
        0.0
    }
}

/// Density of measuring `z` when the ray cast predicts `z_star`.
pub fn beam_likelihood(z: f64, z_star: f64, z_max: f64, params: &BeamModelParams) -> f64 {
    let p = params.z_hit * hit_density(z, z_star, params.sigma_hit, z_max)
        + params.z_short * short_density(z, z_star, params.lambda_short)
        + params.z_max_w * max_density(z, z_max, params.max_bin)
        + params.z_rand * rand_density(z, z_max);
    if p.is_finite() {
        p.max(MIN_DENSITY)
    } else {
        MIN_DENSITY
    }
}
