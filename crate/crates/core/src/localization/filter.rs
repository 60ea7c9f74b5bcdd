//! Particle filter operations for semantic Monte Carlo localization.

use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::beam::{beam_likelihood, BeamModelParams};
use super::motion::OdometryDelta;
use super::raycast::raycast_semantic;
use super::LaserScan;
use crate::geometry::{normalize_angle, Point2, Pose2D};
use crate::grid::SemanticOccupancyGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub pose: Pose2D,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalizationError {
    #[error("particle set is empty")]
    Empty,
    #[error("no free cell to spread particles over")]
    NoFreeSpace,
}

/// Weighted pose hypotheses.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParticleSet {
    particles: Vec<Particle>,
}

impl ParticleSet {
    /// Equal-weight particles at the given poses.
    pub fn from_poses<I: IntoIterator<Item = Pose2D>>(poses: I) -> Self {
        let mut particles: Vec<Particle> = poses.into_iter().map(|pose| Particle { pose, weight: 1.0 }).collect();
        let n = particles.len() as f64;
        for p in &mut particles {
            p.weight = 1.0 / n;
        }
        ParticleSet { particles }
    }

    /// Particles exactly as given; weights are not touched.
    pub fn from_particles(particles: Vec<Particle>) -> Self {
        ParticleSet { particles }
    }

    /// `n` particles drawn uniformly over the free cells of `grid`, headings uniform.
    pub fn uniform_free<R: Rng + ?Sized>(
        grid: &SemanticOccupancyGrid,
        n: usize,
        rng: &mut R,
    ) -> Result<Self, LocalizationError> {
        let free: Vec<_> = grid.indices().filter(|c| !grid.is_occupied(*c)).collect();
        if free.is_empty() {
            return Err(LocalizationError::NoFreeSpace);
        }
        let res = grid.resolution();
        Ok(Self::from_poses((0..n).map(|_| {
            let c = free[rng.random_range(0..free.len())];
            let center = grid.cell_center(c);
            Pose2D::new(
                center.x + (rng.random::<f64>() - 0.5) * res,
                center.y + (rng.random::<f64>() - 0.5) * res,
                uniform_heading(rng),
            )
        })))
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn weights_sum(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    /// Rescales weights to sum to one. Returns false if the total is not positive.
    pub fn normalize(&mut self) -> bool {
        let total = self.weights_sum();
        if !(total > 0.0 && total.is_finite()) {
            return false;
        }
        for p in &mut self.particles {
            p.weight /= total;
        }
        true
    }

    /// 1 / sum(w^2) of the normalised weights.
    pub fn effective_sample_size(&self) -> f64 {
        let total = self.weights_sum();
        if total <= 0.0 {
            return 0.0;
        }
        let sq: f64 = self
            .particles
            .iter()
            .map(|p| (p.weight / total) * (p.weight / total))
            .sum();
        1.0 / sq
    }

    /// Weighted standard deviation of particle positions (metres).
    pub fn position_spread(&self) -> f64 {
        let total = self.weights_sum();
        if self.is_empty() || total <= 0.0 {
            return 0.0;
        }
        let (mx, my) = self.particles.iter().fold((0.0, 0.0), |(x, y), p| {
            (x + p.weight * p.pose.x, y + p.weight * p.pose.y)
        });
        let (mx, my) = (mx / total, my / total);
        let var = self
            .particles
            .iter()
            .map(|p| p.weight * ((p.pose.x - mx).powi(2) + (p.pose.y - my).powi(2)))
            .sum::<f64>()
            / total;
        var.sqrt()
    }
}

pub(crate) fn uniform_heading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    normalize_angle((rng.random::<f64>() * 2.0 - 1.0) * core::f64::consts::PI)
}

/// Outcome of a measurement update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UpdateReport {
    /// All particles lost their support and were redrawn over free space.
    pub diverged: bool,
}

/// Stride that keeps at most `max_beams` beams of a `beam_count`-beam scan.
pub fn beam_stride_for(beam_count: usize, max_beams: usize) -> usize {
    beam_count.div_ceil(max_beams.max(1)).max(1)
}

/// Log-likelihood of a scan given a pose, over every `stride`-th beam.
/// `None` when the pose lies outside the grid.
pub fn scan_log_likelihood(
    pose: &Pose2D,
    scan: &LaserScan,
    grid: &SemanticOccupancyGrid,
    params: &BeamModelParams,
    stride: usize,
) -> Option<f64> {
    let mut ll = 0.0;
    for k in (0..scan.ranges.len()).step_by(stride.max(1)) {
        let z_star = raycast_semantic(
            grid,
            pose,
            scan.beam_angle(k),
            scan.range_max,
            &params.sensor_class_mask,
        )
        .ok()?;
        let z = scan.ranges[k].clamp(0.0, scan.range_max);
        ll += beam_likelihood(z, z_star, scan.range_max, params).ln();
    }
    Some(ll)
}

/// Multiplies each weight by the scan likelihood (accumulated in log space)
/// and renormalises. If no particle keeps any support, the set is redrawn
/// uniformly over free space and the report is flagged as diverged.
pub fn measurement_update<R: Rng + ?Sized>(
    particles: &mut ParticleSet,
    scan: &LaserScan,
    grid: &SemanticOccupancyGrid,
    params: &BeamModelParams,
    beam_stride: usize,
    rng: &mut R,
) -> Result<UpdateReport, LocalizationError> {
    if particles.is_empty() {
        return Err(LocalizationError::Empty);
    }
    let log_w: Vec<f64> = particles
        .particles
        .iter()
        .map(|p| {
            if p.weight <= 0.0 {
                return f64::NEG_INFINITY;
            }
            match scan_log_likelihood(&p.pose, scan, grid, params, beam_stride) {
                Some(ll) => p.weight.ln() + ll,
                None => f64::NEG_INFINITY,
            }
        })
        .collect();
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_finite() {
        for (p, lw) in particles.particles.iter_mut().zip(&log_w) {
            p.weight = (lw - max).exp();
        }
        if particles.normalize() {
            return Ok(UpdateReport { diverged: false });
        }
    }
    let n = particles.len();
    *particles = ParticleSet::uniform_free(grid, n, rng)?;
    Ok(UpdateReport { diverged: true })
}

/// Propagates every particle through the noisy odometry model.
pub fn motion_update<R: Rng + ?Sized>(particles: &mut ParticleSet, delta: &OdometryDelta, rng: &mut R) {
    for p in &mut particles.particles {
        p.pose = delta.sample(&p.pose, rng);
    }
}

/// Low-variance systematic resampling into `n` equally weighted particles.
pub fn systematic_resample<R: Rng + ?Sized>(particles: &ParticleSet, n: usize, rng: &mut R) -> ParticleSet {
    let offset = rng.random::<f64>() / n as f64;
    systematic_resample_with_offset(particles, n, offset)
}

/// Systematic resampling with an explicit first pointer in [0, 1/n).
pub fn systematic_resample_with_offset(particles: &ParticleSet, n: usize, offset: f64) -> ParticleSet {
    let total = particles.weights_sum();
    let src = &particles.particles;
    let mut out = Vec::with_capacity(n);
    if src.is_empty() || n == 0 {
        return ParticleSet { particles: out };
    }
    let step = 1.0 / n as f64;
    let mut idx = 0;
    let mut cumulative = src[0].weight / total;
    for m in 0..n {
        let u = offset + m as f64 * step;
        while u >= cumulative && idx + 1 < src.len() {
            idx += 1;
            cumulative += src[idx].weight / total;
        }
        out.push(Particle {
            pose: src[idx].pose,
            weight: step,
        });
    }
    ParticleSet { particles: out }
}

/// Resamples when the effective sample size drops below half the set size.
/// Returns whether resampling happened.
pub fn resample<R: Rng + ?Sized>(particles: &mut ParticleSet, rng: &mut R) -> bool {
    let n = particles.len();
    if n == 0 || particles.effective_sample_size() >= n as f64 / 2.0 {
        return false;
    }
    *particles = systematic_resample(particles, n, rng);
    true
}

/// Weighted pose estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseEstimate {
    pub pose: Pose2D,
    /// Headings cancelled out; `pose.theta` fell back to the first particle's heading.
    pub ambiguous_heading: bool,
}

/// Weighted mean position and circular mean heading.
pub fn estimate_pose(particles: &ParticleSet) -> Result<PoseEstimate, LocalizationError> {
    let first = particles.particles.first().ok_or(LocalizationError::Empty)?;
    let mut total = particles.weights_sum();
    let uniform = total <= 0.0;
    if uniform {
        total = particles.len() as f64;
    }
    let (mut x, mut y, mut s, mut c) = (0.0, 0.0, 0.0, 0.0);
    for p in &particles.particles {
        let w = if uniform { 1.0 } else { p.weight } / total;
        x += w * p.pose.x;
        y += w * p.pose.y;
        s += w * p.pose.theta.sin();
        c += w * p.pose.theta.cos();
    }
    let ambiguous = s.hypot(c) < 1e-12;
    let theta = if ambiguous { first.pose.theta } else { s.atan2(c) };
    Ok(PoseEstimate {
        pose: Pose2D::new(x, y, theta),
        ambiguous_heading: ambiguous,
    })
}

/// Mean of particle positions; convenience for telemetry.
pub fn mean_position(particles: &ParticleSet) -> Option<Point2> {
    estimate_pose(particles).ok().map(|e| e.pose.position())
}
