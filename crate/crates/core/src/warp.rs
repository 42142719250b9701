//! Motion models mapping each event to its location at the window's
//! reference time, with analytic Jacobians.
//!
//! Both models use `x' = T(x, t - t_ref; theta)` with `T(x, 0; theta) = x`:
//!
//! * `Translation2d`, `theta = [v_x, v_y]` px/s: `x' = x + (t - t_ref) * theta`.
//! * `RotationInPlane`, `theta = [omega]` rad/s: `x'` is `x` rotated by
//!   `omega * (t - t_ref)` about the image center `((W-1)/2, (H-1)/2)`.
//!
//! `theta` therefore describes how events must be moved, so a pattern
//! translating at `+v` px/s is collapsed by `theta = -v`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{EventWindow, SensorGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionModel {
    Translation2d,
    RotationInPlane,
}

impl MotionModel {
    pub fn dim(self) -> usize {
        match self {
            MotionModel::Translation2d => 2,
            MotionModel::RotationInPlane => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MotionModel::Translation2d => "translation2d",
            MotionModel::RotationInPlane => "rotation_inplane",
        }
    }

    /// Pixel displacement produced by a unit parameter over `duration`
    /// seconds, used to put step sizes in pixel units.
    pub fn displacement_scale(self, geometry: SensorGeometry, duration: f64) -> f64 {
        let span = if duration > 0.0 { duration } else { 1.0 };
        match self {
            MotionModel::Translation2d => span,
            MotionModel::RotationInPlane => {
                let (cx, cy) = rotation_center(geometry);
                span * cx.hypot(cy).max(1.0)
            }
        }
    }
}

impl fmt::Display for MotionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MotionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translation2d" | "translation" => Ok(MotionModel::Translation2d),
            "rotation_inplane" | "rotation-inplane" | "rotation" => Ok(MotionModel::RotationInPlane),
            other => Err(Error::InvalidConfig(format!("unknown motion model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionParams {
    pub model: MotionModel,
    pub values: Vec<f64>,
}

impl MotionParams {
    pub fn new(model: MotionModel, values: Vec<f64>) -> Result<Self> {
        if values.len() != model.dim() {
            return Err(Error::DimensionMismatch {
                model: model.name(),
                expected: model.dim(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "motion parameters must be finite, got {values:?}"
            )));
        }
        Ok(MotionParams { model, values })
    }

    pub fn zero(model: MotionModel) -> Self {
        MotionParams {
            model,
            values: vec![0.0; model.dim()],
        }
    }

    pub fn translation(vx: f64, vy: f64) -> Self {
        MotionParams {
            model: MotionModel::Translation2d,
            values: vec![vx, vy],
        }
    }

    pub fn rotation(omega: f64) -> Self {
        MotionParams {
            model: MotionModel::RotationInPlane,
            values: vec![omega],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn negated(&self) -> Self {
        MotionParams {
            model: self.model,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.values.len() != self.model.dim() {
            return Err(Error::DimensionMismatch {
                model: self.model.name(),
                expected: self.model.dim(),
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

pub fn rotation_center(geometry: SensorGeometry) -> (f64, f64) {
    (
        (geometry.width as f64 - 1.0) / 2.0,
        (geometry.height as f64 - 1.0) / 2.0,
    )
}

/// Motion-compensated positions of a window's events. Positions may fall
/// outside the sensor.
#[derive(Debug, Clone)]
pub struct WarpedEvents<'a> {
    pub positions: Vec<[f64; 2]>,
    pub source: &'a EventWindow,
    pub theta: MotionParams,
}

/// Per-event Jacobian `d(x', y') / d theta`, one row per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpJacobian {
    pub dim: usize,
    /// `rows[k][p] = [dx'_k / dtheta_p, dy'_k / dtheta_p]`
    pub rows: Vec<[[f64; 2]; 2]>,
}

impl WarpJacobian {
    /// Pull per-event position gradients back to parameter space.
    pub fn pullback(&self, position_grads: &[[f64; 2]]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (row, g) in self.rows.iter().zip(position_grads) {
            for (p, o) in out.iter_mut().enumerate() {
                *o += row[p][0] * g[0] + row[p][1] * g[1];
            }
        }
        out
    }
}

pub fn warp<'a>(window: &'a EventWindow, theta: &MotionParams) -> Result<WarpedEvents<'a>> {
    theta.check()?;
    Ok(WarpedEvents {
        positions: warp_positions(window, theta),
        source: window,
        theta: theta.clone(),
    })
}

pub(crate) fn warp_positions(window: &EventWindow, theta: &MotionParams) -> Vec<[f64; 2]> {
    let t_ref = window.t_ref();
    match theta.model {
        MotionModel::Translation2d => {
            let (vx, vy) = (theta.values[0], theta.values[1]);
            window
                .events()
                .iter()
                .map(|e| {
                    let dt = e.t - t_ref;
                    [e.x + dt * vx, e.y + dt * vy]
                })
                .collect()
        }
        MotionModel::RotationInPlane => {
            let omega = theta.values[0];
            let (cx, cy) = rotation_center(window.geometry());
            window
                .events()
                .iter()
                .map(|e| {
                    let phi = omega * (e.t - t_ref);
                    let s = phi.sin();
                    // cos(phi) - 1, without cancellation near zero
                    let cm1 = -2.0 * (0.5 * phi).sin().powi(2);
                    let (dx, dy) = (e.x - cx, e.y - cy);
                    [e.x + (cm1 * dx - s * dy), e.y + (s * dx + cm1 * dy)]
                })
                .collect()
        }
    }
}

pub fn warp_jacobian(window: &EventWindow, theta: &MotionParams) -> Result<WarpJacobian> {
    theta.check()?;
    let t_ref = window.t_ref();
    let rows = match theta.model {
        MotionModel::Translation2d => window
            .events()
            .iter()
            .map(|e| {
                let dt = e.t - t_ref;
                [[dt, 0.0], [0.0, dt]]
            })
            .collect(),
        MotionModel::RotationInPlane => {
            let omega = theta.values[0];
            let (cx, cy) = rotation_center(window.geometry());
            window
                .events()
                .iter()
                .map(|e| {
                    let dt = e.t - t_ref;
                    let (s, c) = (omega * dt).sin_cos();
                    let (dx, dy) = (e.x - cx, e.y - cy);
                    [[dt * (-s * dx - c * dy), dt * (c * dx - s * dy)], [0.0, 0.0]]
                })
                .collect()
        }
    };
    Ok(WarpJacobian {
        dim: theta.model.dim(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::Event;
    use std::f64::consts::PI;

    fn window(events: Vec<Event>, w: usize, h: usize, t_ref: f64) -> EventWindow {
        let g = SensorGeometry::new(w, h).unwrap();
        EventWindow::new(events, g, 0.0, 2.0, t_ref).unwrap()
    }

    #[test]
    fn zero_translation_is_identity() {
        let win = window(
            vec![
                Event::new(1.5, 2.5, 0.1, 1).unwrap(),
                Event::new(3.0, 0.2, 1.9, -1).unwrap(),
            ],
            8,
            8,
            1.0,
        );
        for model in [MotionModel::Translation2d, MotionModel::RotationInPlane] {
            let w = warp(&win, &MotionParams::zero(model)).unwrap();
            assert_eq!(w.positions, win.positions());
        }
    }

    #[test]
    fn translation_follows_formula() {
        let win = window(vec![Event::new(5.0, 5.0, 1.0, 1).unwrap()], 10, 10, 0.5);
        let w = warp(&win, &MotionParams::translation(2.0, 0.0)).unwrap();
        assert_eq!(w.positions[0], [6.0, 5.0]);
    }

    #[test]
    fn rotation_half_turn() {
        let g = SensorGeometry::new(9, 7).unwrap();
        let (cx, cy) = rotation_center(g);
        let win = EventWindow::new(vec![Event::new(cx + 1.0, cy, 1.5, 1).unwrap()], g, 0.0, 2.0, 0.5)
            .unwrap();
        let w = warp(&win, &MotionParams::rotation(PI)).unwrap();
        assert!((w.positions[0][0] - (cx - 1.0)).abs() < 1e-12);
        assert!((w.positions[0][1] - cy).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let win = window(vec![], 4, 4, 1.0);
        let bad = MotionParams {
            model: MotionModel::Translation2d,
            values: vec![1.0],
        };
        assert!(matches!(warp(&win, &bad), Err(Error::DimensionMismatch { .. })));
        assert!(warp_jacobian(&win, &bad).is_err());
        assert!(MotionParams::new(MotionModel::RotationInPlane, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn translation_jacobian_rows() {
        let win = window(
            vec![
                Event::new(1.0, 1.0, 1.0, 1).unwrap(),
                Event::new(1.0, 1.0, 1.25, 1).unwrap(),
            ],
            4,
            4,
            1.0,
        );
        let j = warp_jacobian(&win, &MotionParams::translation(3.0, -1.0)).unwrap();
        assert_eq!(j.rows[0], [[0.0, 0.0], [0.0, 0.0]]);
        assert_eq!(j.rows[1][0][0], 0.25);
        assert_eq!(j.rows[1][1][1], 0.25);
    }

    fn central_difference(win: &EventWindow, theta: &MotionParams, p: usize, h: f64) -> Vec<[f64; 2]> {
        let mut plus = theta.clone();
        let mut minus = theta.clone();
        plus.values[p] += h;
        minus.values[p] -= h;
        let a = warp(win, &plus).unwrap().positions;
        let b = warp(win, &minus).unwrap().positions;
        a.iter()
            .zip(&b)
            .map(|(a, b)| [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)])
            .collect()
    }

    #[test]
    fn rotation_jacobian_matches_central_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let g = SensorGeometry::new(32, 24).unwrap();
        let mut events: Vec<Event> = (0..200)
            .map(|_| {
                Event::new(
                    rng.random_range(0.0..32.0),
                    rng.random_range(0.0..24.0),
                    rng.random_range(0.0..0.2),
                    1,
                )
                .unwrap()
            })
            .collect();
        events.sort_by(|a, b| a.t.total_cmp(&b.t));
        let win = EventWindow::new(events, g, 0.0, 0.2, 0.1).unwrap();
        for _ in 0..10 {
            let theta = MotionParams::rotation(rng.random_range(-6.0..6.0));
            let j = warp_jacobian(&win, &theta).unwrap();
            let fd = central_difference(&win, &theta, 0, 1e-5);
            for (row, n) in j.rows.iter().zip(&fd) {
                for c in 0..2 {
                    let scale = row[0][c].abs().max(n[c].abs()).max(1e-3);
                    assert!((row[0][c] - n[c]).abs() / scale <= 1e-6, "{:?} vs {:?}", row[0], n);
                }
            }
        }
    }
}
