//! Single-task comparison methods: contrast maximization (alignment only), a
//! density-based background-activity filter (denoising only), and the two
//! chained one after the other.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::contrast::{splat, splat_adjoint, variance, variance_adjoint, ConfidenceMap, GaussianKernel};
use crate::error::{Error, Result};
use crate::events::{EventLabels, EventWindow};
use crate::joint::{adam_step, AdamState, JointConfig, JointResult, MIN_EVENTS};
use crate::warp::{warp_jacobian, warp_positions, MotionModel, MotionParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BafConfig {
    /// Temporal support in seconds, applied on both sides of each event.
    pub dt_max: f64,
    /// L∞ radius in whole pixels.
    pub radius: usize,
    pub min_support: usize,
}

impl Default for BafConfig {
    fn default() -> Self {
        BafConfig {
            dt_max: 0.010,
            radius: 1,
            min_support: 1,
        }
    }
}

impl BafConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_max > 0.0) || self.radius < 1 || self.min_support < 1 {
            return Err(Error::InvalidConfig(format!(
                "BAF needs dt_max > 0, radius >= 1, min_support >= 1; got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Label an event as signal iff at least `min_support` other events share its
/// L∞ pixel neighborhood and lie within `dt_max` of it in time.
///
/// Pixel indices are `floor(x)`, `floor(y)`. A count grid tracks the events
/// inside a two-sided sliding time window, so the cost is
/// `O(N (2r + 1)^2)`.
pub fn baf_filter(window: &EventWindow, cfg: &BafConfig) -> Result<EventLabels> {
    cfg.validate()?;
    let events = window.events();
    if events.is_empty() {
        return Ok(EventLabels(Vec::new()));
    }
    let cells: Vec<(i64, i64)> = events
        .iter()
        .map(|e| (e.x.floor() as i64, e.y.floor() as i64))
        .collect();
    let x0 = cells.iter().map(|c| c.0).min().unwrap_or(0);
    let y0 = cells.iter().map(|c| c.1).min().unwrap_or(0);
    let w = (cells.iter().map(|c| c.0).max().unwrap_or(0) - x0 + 1) as usize;
    let h = (cells.iter().map(|c| c.1).max().unwrap_or(0) - y0 + 1) as usize;
    let local: Vec<(usize, usize)> = cells
        .iter()
        .map(|&(x, y)| ((x - x0) as usize, (y - y0) as usize))
        .collect();

    let mut grid = vec![0u32; w * h];
    let r = cfg.radius;
    let (mut lo, mut hi) = (0, 0);
    let mut labels = Vec::with_capacity(events.len());
    for (k, ev) in events.iter().enumerate() {
        while hi < events.len() && (events[hi].t - ev.t).abs() <= cfg.dt_max {
            let (x, y) = local[hi];
            grid[y * w + x] += 1;
            hi += 1;
        }
        while (events[lo].t - ev.t).abs() > cfg.dt_max {
            let (x, y) = local[lo];
            grid[y * w + x] -= 1;
            lo += 1;
        }
        let (x, y) = local[k];
        let mut count = 0u64;
        for yy in y.saturating_sub(r)..=(y + r).min(h - 1) {
            for xx in x.saturating_sub(r)..=(x + r).min(w - 1) {
                count += grid[yy * w + xx] as u64;
            }
        }
        // the event itself is in the grid
        labels.push(count > cfg.min_support as u64);
    }
    Ok(EventLabels(labels))
}

/// Full contrast-maximization run, with the iterate before every step.
#[derive(Debug, Clone, PartialEq)]
pub struct CmaxRun {
    pub theta: MotionParams,
    pub trajectory: Vec<Vec<f64>>,
    pub f_ea: Vec<f64>,
    pub final_f_ea: f64,
}

/// Maximize the variance of the smooth warped-event map by Adam from zero
/// motion, using the step size, Adam constants, kernel width and iteration
/// count of `cfg`. Windows below the event minimum return zero motion.
pub fn cmax_run(window: &EventWindow, model: MotionModel, cfg: &JointConfig) -> Result<CmaxRun> {
    cfg.adam.validate()?;
    let kernel = GaussianKernel::new(cfg.sigma)?;
    let geometry = window.geometry();
    let mut theta = MotionParams::zero(model);
    if window.len() < MIN_EVENTS {
        warn!("cmax: window has {} events; returning zero motion", window.len());
        let f = variance(&splat(&window.positions(), geometry, &kernel).values);
        return Ok(CmaxRun {
            theta,
            trajectory: Vec::new(),
            f_ea: Vec::new(),
            final_f_ea: f,
        });
    }
    let lr = cfg.lr_theta / model.displacement_scale(geometry, window.duration());
    let mut state = AdamState::new(model.dim());
    let mut trajectory = Vec::with_capacity(cfg.iterations);
    let mut history = Vec::with_capacity(cfg.iterations);
    for iteration in 0..cfg.iterations {
        let positions = warp_positions(window, &theta);
        let map = splat(&positions, geometry, &kernel);
        let f = variance(&map.values);
        if !f.is_finite() {
            return Err(Error::NonFinite { iteration });
        }
        trajectory.push(theta.values.clone());
        history.push(f);
        // ascent on f is descent on -f
        let adjoint: Vec<f64> = variance_adjoint(&map.values).into_iter().map(|a| -a).collect();
        let position_grads = splat_adjoint(&positions, geometry, &kernel, &adjoint);
        let grad = warp_jacobian(window, &theta)?.pullback(&position_grads);
        adam_step(&mut theta.values, &grad, &mut state, lr, &cfg.adam)
            .map_err(|_| Error::NonFinite { iteration })?;
    }
    let final_f_ea = variance(&splat(&warp_positions(window, &theta), geometry, &kernel).values);
    if !final_f_ea.is_finite() {
        return Err(Error::NonFinite {
            iteration: cfg.iterations,
        });
    }
    Ok(CmaxRun {
        theta,
        trajectory,
        f_ea: history,
        final_f_ea,
    })
}

pub fn cmax_solve(window: &EventWindow, model: MotionModel, cfg: &JointConfig) -> Result<MotionParams> {
    Ok(cmax_run(window, model, cfg)?.theta)
}

/// BAF first, then contrast maximization on the events it kept. The
/// confidence map is the per-pixel mask of kept events.
pub fn sequential_pipeline(
    window: &EventWindow,
    baf_cfg: &BafConfig,
    cmax_cfg: &JointConfig,
) -> Result<JointResult> {
    let labels = baf_filter(window, baf_cfg)?;
    let kept = window.select(&labels)?;
    let run = cmax_run(&kept, cmax_cfg.model, cmax_cfg)?;
    let geometry = window.geometry();
    let mut conf = ConfidenceMap::filled(geometry, -20.0);
    for e in kept.events() {
        if let Some(idx) = geometry.cell_of(e.x, e.y) {
            conf.logits[idx] = 20.0;
        }
    }
    let event_weights = labels.iter().map(|s| if s { 1.0 } else { 0.0 }).collect();
    Ok(JointResult {
        theta: run.theta,
        conf,
        labels,
        event_weights,
        trace: Vec::new(),
        weights: crate::joint::ObjectiveWeights {
            alpha: 0.0,
            beta: 0.0,
            b_ea: 0.0,
            b_ed: 0.0,
        },
        warm_start: None,
        final_parts: None,
    })
}
