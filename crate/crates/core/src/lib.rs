//! Joint motion compensation and denoising for event-camera streams.
//!
//! Events are warped by a parametric motion, splatted into a smooth contrast
//! map, and a per-pixel confidence map is optimized together with the motion
//! so that aligned structure stays sharp while isolated events are
//! suppressed. See the `examples/` directory for end-to-end usage.

// `!(a < b)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cli;
pub mod contrast;
pub mod error;
pub mod events;
pub mod joint;
pub mod metrics;
pub mod render;
pub mod synth;
pub mod warp;

pub use error::{Error, Result};
pub use events::{Event, EventLabels, EventWindow, SensorGeometry};
pub use joint::{solve, JointConfig, JointResult};
pub use warp::{MotionModel, MotionParams};
