use log::warn;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamParams, AdamState};
use super::objective::{raw_baseline, Objective, ObjectiveParts, ObjectiveWeights};
use crate::baselines::cmax_run;
use crate::contrast::{splat, ConfidenceMap, GaussianKernel};
use crate::error::{Error, Result};
use crate::events::{EventLabels, EventWindow};
use crate::warp::{warp_positions, MotionModel, MotionParams};

/// Windows with fewer events are not optimized at all.
pub const MIN_EVENTS: usize = 10;

/// How a regularization weight is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    /// Used verbatim.
    Absolute(f64),
    /// Multiplied by a map statistic so one value serves any event count and
    /// resolution (see [`JointConfig::resolve_weights`]).
    Scaled(f64),
}

impl Penalty {
    fn value(self) -> f64 {
        match self {
            Penalty::Absolute(v) | Penalty::Scaled(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EaBaseline {
    Explicit(f64),
    /// Run an alignment-only phase first and use `kappa * f_EA` at its
    /// result.
    WarmstartScaled(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointConfig {
    pub model: MotionModel,
    pub alpha: Penalty,
    pub beta: Penalty,
    pub b_ea: EaBaseline,
    pub iterations: usize,
    /// Step size in pixels of displacement across the window.
    pub lr_theta: f64,
    pub lr_logits: f64,
    pub adam: AdamParams,
    pub sigma: f64,
    pub tau: f64,
    pub initial_logit: f64,
    /// Keep the confidence map at its initial value.
    pub freeze_confidence: bool,
}

impl Default for JointConfig {
    fn default() -> Self {
        JointConfig {
            model: MotionModel::Translation2d,
            alpha: Penalty::Scaled(0.02),
            beta: Penalty::Scaled(1.0),
            b_ea: EaBaseline::WarmstartScaled(1.1),
            iterations: 300,
            lr_theta: 0.05,
            lr_logits: 0.1,
            adam: AdamParams::default(),
            sigma: 1.0,
            tau: 0.5,
            initial_logit: 0.0,
            freeze_confidence: false,
        }
    }
}

impl JointConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.alpha.value() >= 0.0) || !(self.beta.value() >= 0.0) {
            return bad(format!("alpha/beta must be >= 0: {:?} {:?}", self.alpha, self.beta));
        }
        match self.b_ea {
            EaBaseline::Explicit(b) if !b.is_finite() => return bad(format!("b_EA must be finite, got {b}")),
            EaBaseline::WarmstartScaled(k) if !(k.is_finite() && k > 0.0) => {
                return bad(format!("kappa must be positive, got {k}"))
            }
            _ => {}
        }
        if !(self.lr_theta > 0.0) || !(self.lr_logits > 0.0) {
            return bad("learning rates must be positive".into());
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidSigma(self.sigma));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad(format!("tau must lie in (0, 1), got {}", self.tau));
        }
        if !self.initial_logit.is_finite() {
            return bad("initial logit must be finite".into());
        }
        self.adam.validate()
    }

    /// Turn the configured penalties into absolute weights for a window
    /// whose smooth map at the starting motion is `map`.
    ///
    /// `Scaled(b)` for beta gives `b / HW`, matching the `1/HW` of the
    /// variance terms. `Scaled(a)` for alpha gives `a * s / HW` where `s =
    /// sum(m^3) / sum(m)` is the squared map value seen by an average event.
    /// Away from the regret term a cell then settles at `w = 1 - a s / (2 b
    /// m^2)`, so the confidence threshold depends only on `a / b` and the
    /// objective is homogeneous of degree two in the event count.
    pub fn resolve_weights(&self, map: &[f64]) -> (f64, f64) {
        let cells = map.len().max(1) as f64;
        let mass: f64 = map.iter().sum();
        let scale = if mass > 0.0 {
            map.iter().map(|m| m * m * m).sum::<f64>() / mass
        } else {
            0.0
        };
        let alpha = match self.alpha {
            Penalty::Absolute(a) => a,
            Penalty::Scaled(a) => a * scale / cells,
        };
        let beta = match self.beta {
            Penalty::Absolute(b) => b,
            Penalty::Scaled(b) => b / cells,
        };
        (alpha, beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub theta: Vec<f64>,
    #[serde(flatten)]
    pub parts: ObjectiveParts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointResult {
    pub theta: MotionParams,
    pub conf: ConfidenceMap,
    pub labels: EventLabels,
    /// Confidence interpolated at each event's warped position.
    pub event_weights: Vec<f64>,
    /// One record per iteration, taken before that iteration's update.
    pub trace: Vec<TraceRecord>,
    pub weights: ObjectiveWeights,
    pub warm_start: Option<MotionParams>,
    /// Objective at the returned `(theta, conf)`.
    pub final_parts: Option<ObjectiveParts>,
}

/// Jointly estimate motion and per-pixel confidences for one window.
pub fn solve(window: &EventWindow, cfg: &JointConfig) -> Result<JointResult> {
    cfg.validate()?;
    let geometry = window.geometry();
    if window.len() < MIN_EVENTS {
        warn!(
            "window [{}, {}] has {} events (< {MIN_EVENTS}); skipping optimization",
            window.t_start(),
            window.t_end(),
            window.len()
        );
        return Ok(JointResult {
            theta: MotionParams::zero(cfg.model),
            conf: ConfidenceMap::filled(geometry, cfg.initial_logit),
            labels: EventLabels::all(window.len(), false),
            event_weights: vec![0.0; window.len()],
            trace: Vec::new(),
            weights: ObjectiveWeights {
                alpha: 0.0,
                beta: 0.0,
                b_ea: 0.0,
                b_ed: 0.0,
            },
            warm_start: None,
            final_parts: None,
        });
    }

    let kernel = GaussianKernel::new(cfg.sigma)?;
    let b_ed = raw_baseline(window, cfg.sigma)?;
    let (start, b_ea, warm_start) = match cfg.b_ea {
        EaBaseline::Explicit(b) => (MotionParams::zero(cfg.model), b, None),
        EaBaseline::WarmstartScaled(kappa) => {
            let warm_cfg = JointConfig {
                iterations: cfg.iterations / 2,
                ..cfg.clone()
            };
            let warm = cmax_run(window, cfg.model, &warm_cfg)?;
            let f_ea = warm.final_f_ea;
            (warm.theta.clone(), kappa * f_ea, Some(warm.theta))
        }
    };

    let start_map = splat(&warp_positions(window, &start), geometry, &kernel);
    let (alpha, beta) = cfg.resolve_weights(&start_map.values);
    let weights = ObjectiveWeights { alpha, beta, b_ea, b_ed };
    let objective = Objective::new(window, cfg.sigma, weights)?;

    let mut theta = start;
    let mut conf = ConfidenceMap::filled(geometry, cfg.initial_logit);
    let mut theta_state = AdamState::new(theta.dim());
    let mut logit_state = AdamState::new(conf.logits.len());
    let lr_theta = cfg.lr_theta / cfg.model.displacement_scale(geometry, window.duration());
    let mut trace = Vec::with_capacity(cfg.iterations);

    for iteration in 0..cfg.iterations {
        let grads = objective.gradients(&theta, &conf)?;
        if !grads.parts.total.is_finite() {
            return Err(Error::NonFinite { iteration });
        }
        trace.push(TraceRecord {
            iteration,
            theta: theta.values.clone(),
            parts: grads.parts,
        });
        adam_step(&mut theta.values, &grads.theta, &mut theta_state, lr_theta, &cfg.adam)
            .map_err(|_| Error::NonFinite { iteration })?;
        if !cfg.freeze_confidence {
            adam_step(&mut conf.logits, &grads.logits, &mut logit_state, cfg.lr_logits, &cfg.adam)
                .map_err(|_| Error::NonFinite { iteration })?;
        }
    }

    let final_parts = objective.evaluate(&theta, &conf)?;
    if !final_parts.total.is_finite() {
        return Err(Error::NonFinite {
            iteration: cfg.iterations,
        });
    }
    let (labels, event_weights) = classify(window, &theta, &conf, cfg.tau);
    Ok(JointResult {
        theta,
        conf,
        labels,
        event_weights,
        trace,
        weights,
        warm_start,
        final_parts: Some(final_parts),
    })
}

/// Signal iff the bilinearly interpolated confidence at the warped position
/// reaches `tau`.
pub fn classify(
    window: &EventWindow,
    theta: &MotionParams,
    conf: &ConfidenceMap,
    tau: f64,
) -> (EventLabels, Vec<f64>) {
    let weights: Vec<f64> = warp_positions(window, theta)
        .iter()
        .map(|p| conf.sample(p[0], p[1]))
        .collect();
    let labels = EventLabels(weights.iter().map(|&w| w >= tau).collect());
    (labels, weights)
}
