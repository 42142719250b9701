//! The regret-scalarized alignment/denoising objective
//!
//! ```text
//! f_EA    = var(m)                   m = smooth map of warped events
//! f_ED    = var(w ∘ m)               w = sigmoid(logits)
//! r_EA    = b_EA - f_EA
//! r_ED    = f_ED - b_ED
//! total   = max(r_EA, r_ED) + alpha * sum(w) + beta * ||w ∘ m - m||_F^2
//! ```
//!
//! The max is differentiated through its active branch; an exact tie takes
//! the average of both branches.

use serde::{Deserialize, Serialize};

use crate::contrast::{sigmoid, splat, splat_adjoint, variance, variance_adjoint, ConfidenceMap, GaussianKernel};
use crate::error::{Error, Result};
use crate::events::EventWindow;
use crate::warp::{warp_jacobian, warp_positions, MotionParams};

/// Fully resolved scalar weights of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub alpha: f64,
    pub beta: f64,
    pub b_ea: f64,
    pub b_ed: f64,
}

impl ObjectiveWeights {
    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !(self.beta >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha and beta must be non-negative, got {} and {}",
                self.alpha, self.beta
            )));
        }
        if !self.b_ea.is_finite() || !self.b_ed.is_finite() {
            return Err(Error::InvalidConfig("baselines must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveParts {
    pub f_ea: f64,
    pub f_ed: f64,
    pub r_ea: f64,
    pub r_ed: f64,
    pub regret: f64,
    pub l1: f64,
    pub fidelity: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveGradients {
    pub parts: ObjectiveParts,
    pub theta: Vec<f64>,
    pub logits: Vec<f64>,
}

/// `b_ED`: variance of the smooth map of the raw, unweighted events.
pub fn raw_baseline(window: &EventWindow, sigma: f64) -> Result<f64> {
    let kernel = GaussianKernel::new(sigma)?;
    Ok(variance(&splat(&window.positions(), window.geometry(), &kernel).values))
}

/// Objective bound to one window and one set of weights.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    window: &'a EventWindow,
    kernel: GaussianKernel,
    weights: ObjectiveWeights,
}

struct Forward {
    positions: Vec<[f64; 2]>,
    map: Vec<f64>,
    w: Vec<f64>,
    weighted: Vec<f64>,
    parts: ObjectiveParts,
}

impl<'a> Objective<'a> {
    pub fn new(window: &'a EventWindow, sigma: f64, weights: ObjectiveWeights) -> Result<Self> {
        weights.validate()?;
        Ok(Objective {
            window,
            kernel: GaussianKernel::new(sigma)?,
            weights,
        })
    }

    pub fn weights(&self) -> ObjectiveWeights {
        self.weights
    }

    fn forward(&self, theta: &MotionParams, conf: &ConfidenceMap) -> Result<Forward> {
        let geometry = self.window.geometry();
        if conf.geometry != geometry {
            return Err(Error::ShapeMismatch {
                expected_w: geometry.width,
                expected_h: geometry.height,
                got_w: conf.geometry.width,
                got_h: conf.geometry.height,
            });
        }
        // validates the parameter dimension
        warp_jacobian_dims(theta)?;
        let positions = warp_positions(self.window, theta);
        let map = splat(&positions, geometry, &self.kernel).values;
        let w: Vec<f64> = conf.logits.iter().map(|&l| sigmoid(l)).collect();
        let weighted: Vec<f64> = map.iter().zip(&w).map(|(m, w)| w * m).collect();

        let ObjectiveWeights { alpha, beta, b_ea, b_ed } = self.weights;
        let f_ea = variance(&map);
        let f_ed = variance(&weighted);
        let r_ea = b_ea - f_ea;
        let r_ed = f_ed - b_ed;
        let regret = r_ea.max(r_ed);
        let l1: f64 = w.iter().sum();
        let fidelity: f64 = weighted
            .iter()
            .zip(&map)
            .map(|(u, m)| (u - m) * (u - m))
            .sum();
        let parts = ObjectiveParts {
            f_ea,
            f_ed,
            r_ea,
            r_ed,
            regret,
            l1,
            fidelity,
            total: regret + alpha * l1 + beta * fidelity,
        };
        Ok(Forward {
            positions,
            map,
            w,
            weighted,
            parts,
        })
    }

    pub fn evaluate(&self, theta: &MotionParams, conf: &ConfidenceMap) -> Result<ObjectiveParts> {
        Ok(self.forward(theta, conf)?.parts)
    }

    pub fn gradients(&self, theta: &MotionParams, conf: &ConfidenceMap) -> Result<ObjectiveGradients> {
        let Forward {
            positions,
            map,
            w,
            weighted,
            parts,
        } = self.forward(theta, conf)?;
        let ObjectiveWeights { alpha, beta, .. } = self.weights;

        let (a_ea, a_ed) = if parts.r_ea > parts.r_ed {
            (1.0, 0.0)
        } else if parts.r_ed > parts.r_ea {
            (0.0, 1.0)
        } else {
            (0.5, 0.5)
        };

        let mut map_adj = vec![0.0; map.len()];
        let mut w_adj = vec![alpha; map.len()];
        if a_ea != 0.0 {
            for (a, d) in map_adj.iter_mut().zip(variance_adjoint(&map)) {
                *a += a_ea * -d;
            }
        }
        if a_ed != 0.0 {
            let d_ed = variance_adjoint(&weighted);
            for k in 0..map.len() {
                map_adj[k] += a_ed * d_ed[k] * w[k];
                w_adj[k] += a_ed * d_ed[k] * map[k];
            }
        }
        if beta != 0.0 {
            for k in 0..map.len() {
                let gap = w[k] - 1.0;
                map_adj[k] += beta * 2.0 * gap * gap * map[k];
                w_adj[k] += beta * 2.0 * gap * map[k] * map[k];
            }
        }

        let logits = w_adj
            .iter()
            .zip(&w)
            .map(|(g, w)| g * w * (1.0 - w))
            .collect();
        let position_grads = splat_adjoint(&positions, self.window.geometry(), &self.kernel, &map_adj);
        let theta_grad = warp_jacobian(self.window, theta)?.pullback(&position_grads);
        Ok(ObjectiveGradients {
            parts,
            theta: theta_grad,
            logits,
        })
    }
}

fn warp_jacobian_dims(theta: &MotionParams) -> Result<()> {
    if theta.values.len() != theta.model.dim() {
        return Err(Error::DimensionMismatch {
            model: theta.model.name(),
            expected: theta.model.dim(),
            got: theta.values.len(),
        });
    }
    Ok(())
}

pub fn objective(
    window: &EventWindow,
    theta: &MotionParams,
    conf: &ConfidenceMap,
    weights: ObjectiveWeights,
    sigma: f64,
) -> Result<ObjectiveParts> {
    Objective::new(window, sigma, weights)?.evaluate(theta, conf)
}

pub fn objective_gradients(
    window: &EventWindow,
    theta: &MotionParams,
    conf: &ConfidenceMap,
    weights: ObjectiveWeights,
    sigma: f64,
) -> Result<ObjectiveGradients> {
    Objective::new(window, sigma, weights)?.gradients(theta, conf)
}
