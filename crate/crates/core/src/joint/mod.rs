//! Regret-scalarized joint alignment and denoising.

mod adam;
mod objective;
mod solve;

pub use adam::{adam_step, AdamParams, AdamState};
pub use objective::{
    objective, objective_gradients, raw_baseline, Objective, ObjectiveGradients, ObjectiveParts,
    ObjectiveWeights,
};
pub use solve::{
    classify, solve, EaBaseline, JointConfig, JointResult, Penalty, TraceRecord, MIN_EVENTS,
};
