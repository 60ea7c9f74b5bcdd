//! Closed-form linearised trilateration with a known anchor height.

use num_traits::Float;

use super::{colinearity_check, RangeObservation, UwbError};
use crate::geometry::Point2;

/// Incremental QR of an `m x 2` least-squares system via Givens rotations.
#[derive(Debug, Clone, Copy, Default)]
struct GivensQr2 {
    r11: f64,
    r12: f64,
    r22: f64,
    qtb1: f64,
    qtb2: f64,
}

fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    if b == 0.0 {
        return (1.0, 0.0, a);
    }
    let r = a.hypot(b);
    (a / r, b / r, r)
}

impl GivensQr2 {
    fn push_row(&mut self, a1: f64, a2: f64, b: f64) {
        // eliminate a1 against the first row of R
        let (c, s, r) = givens(self.r11, a1);
        let r12 = c * self.r12 + s * a2;
        let row_a2 = -s * self.r12 + c * a2;
        let qtb1 = c * self.qtb1 + s * b;
        let row_b = -s * self.qtb1 + c * b;
        self.r11 = r;
        self.r12 = r12;
        self.qtb1 = qtb1;
        // eliminate what is left against the second row
        let (c, s, r) = givens(self.r22, row_a2);
        self.qtb2 = c * self.qtb2 + s * row_b;
        self.r22 = r;
    }

    fn solve(&self) -> Option<(f64, f64)> {
        let scale = self.r11.abs().max(self.r12.abs());
        if self.r11 == 0.0 || self.r22.abs() <= 1e-12 * scale {
            return None;
        }
        let y = self.qtb2 / self.r22;
        let x = (self.qtb1 - self.r12 * y) / self.r11;
        Some((x, y))
    }
}

/// Planar anchor position from range observations and the anchor height.
///
/// The last observation is the reference `n`. Row `i` of the system is
/// `2(x_n - x_i) X + 2(y_n - y_i) Y = r_i² - r_n² - |p_i|² + |p_n|² - 2 z_a (z_n - z_i)`,
/// solved in the least-squares sense through a QR factorisation.
pub fn trilaterate(obs: &[RangeObservation], anchor_height: f64) -> Result<Point2, UwbError> {
    let score = colinearity_check(obs)?;
    let reference = obs.last().expect("colinearity_check guarantees 3 observations");
    let (xn, yn, zn, rn) = (
        reference.robot_position.x,
        reference.robot_position.y,
        reference.robot_position.z,
        reference.range,
    );
    let norm_n = xn * xn + yn * yn + zn * zn;
    let mut qr = GivensQr2::default();
    for o in &obs[..obs.len() - 1] {
        let (xi, yi, zi, ri) = (o.robot_position.x, o.robot_position.y, o.robot_position.z, o.range);
        let a1 = 2.0 * (xn - xi);
        let a2 = 2.0 * (yn - yi);
        let b = ri * ri - rn * rn - xi * xi - yi * yi - zi * zi + norm_n - 2.0 * anchor_height * (zn - zi);
        qr.push_row(a1, a2, b);
    }
    qr.solve()
        .map(|(x, y)| Point2::new(x, y))
        .ok_or(UwbError::Singular { score })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use alloc::string::ToString;
    use alloc::vec::Vec;

    #[test]
    fn qr_matches_normal_equations() {
        let rows = [(1.0, 2.0, 3.0), (2.0, -1.0, 0.5), (0.3, 0.7, -2.0), (4.0, 1.0, 1.0)];
        let mut qr = GivensQr2::default();
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (x, y, b) in rows {
            qr.push_row(x, y, b);
            a11 += x * x;
            a12 += x * y;
            a22 += y * y;
            b1 += x * b;
            b2 += y * b;
        }
        let det = a11 * a22 - a12 * a12;
        let ex = (a22 * b1 - a12 * b2) / det;
        let ey = (a11 * b2 - a12 * b1) / det;
        let (x, y) = qr.solve().unwrap();
        assert!((x - ex).abs() < 1e-12 && (y - ey).abs() < 1e-12);
    }

    #[test]
    fn colinear_positions_fail() {
        let anchor = Point3::new(2.0, 3.0, 1.8);
        let obs: Vec<_> = (0..20)
            .map(|k| {
                let p = Point3::new(k as f64 * 0.1, k as f64 * 0.05, 0.78);
                RangeObservation {
                    t: k as f64,
                    anchor_id: "a".to_string(),
                    robot_position: p,
                    range: p.distance(&anchor),
                }
            })
            .collect();
        assert!(matches!(trilaterate(&obs, 1.8), Err(UwbError::Singular { .. })));
    }
}
