//! Labeled synthetic event streams.
//!
//! A two-level pattern moves across the sensor. The log intensity at each
//! pixel center is a step between the two levels, so whenever a pattern
//! boundary passes a pixel center the intensity jumps by `log_contrast` and
//! the pixel emits one event per contrast threshold crossed, all at the
//! crossing time. Uniform random events are then mixed in as noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{Event, EventLabels, EventWindow, SensorGeometry};
use crate::warp::{rotation_center, MotionModel, MotionParams};

/// Largest pattern displacement, in pixels, between two intensity samples.
const MAX_STEP_PX: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pattern {
    /// Bright for `x < x0`, dark elsewhere.
    VerticalEdge { x0: f64 },
    /// Bright disc on a dark background.
    Dot { center: [f64; 2], radius: f64 },
    /// Checkerboard of `spacing`-pixel squares turned by 45 degrees, so
    /// neither edge family is parallel to a pixel axis.
    MultiEdge { spacing: f64 },
}

impl Pattern {
    /// Whether pattern coordinates `q` fall on the bright level.
    fn is_bright(&self, q: [f64; 2]) -> bool {
        match *self {
            Pattern::VerticalEdge { x0 } => q[0] < x0,
            Pattern::Dot { center, radius } => (q[0] - center[0]).hypot(q[1] - center[1]) < radius,
            Pattern::MultiEdge { spacing } => {
                let u = (q[0] + q[1]) * std::f64::consts::FRAC_1_SQRT_2;
                let w = (q[0] - q[1]) * std::f64::consts::FRAC_1_SQRT_2;
                let cell = (u / spacing).floor() + (w / spacing).floor();
                cell.rem_euclid(2.0) == 1.0
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Pattern::VerticalEdge { x0 } => x0.is_finite(),
            Pattern::Dot { center, radius } => {
                center.iter().all(|c| c.is_finite()) && radius.is_finite() && radius > 0.0
            }
            Pattern::MultiEdge { spacing } => spacing.is_finite() && spacing > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid pattern {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub geometry: SensorGeometry,
    pub pattern: Pattern,
    /// Pattern motion: px/s for translation, rad/s about the sensor center
    /// for rotation.
    pub motion: MotionParams,
    pub duration: f64,
    /// Log-intensity threshold per event; a boundary crossing emits
    /// `floor(log_contrast / contrast_threshold)` events.
    pub contrast_threshold: f64,
    /// Fraction of all output events that are noise.
    pub noise_rate: f64,
    /// Log-intensity step between the dark and bright pattern levels.
    pub log_contrast: f64,
}

impl SceneSpec {
    pub fn new(geometry: SensorGeometry, pattern: Pattern, motion: MotionParams) -> Self {
        SceneSpec {
            geometry,
            pattern,
            motion,
            duration: 0.1,
            contrast_threshold: 1.0,
            noise_rate: 0.0,
            log_contrast: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pattern.validate()?;
        MotionParams::new(self.motion.model, self.motion.values.clone())?;
        if self.motion.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("motion must be finite".into()));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidConfig(format!("duration must be positive, got {}", self.duration)));
        }
        if !(self.contrast_threshold > 0.0 && self.contrast_threshold.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "contrast threshold must be positive, got {}",
                self.contrast_threshold
            )));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(Error::InvalidConfig(format!("noise rate must lie in [0, 1), got {}", self.noise_rate)));
        }
        if !(self.log_contrast > 0.0 && self.log_contrast.is_finite()) {
            return Err(Error::InvalidConfig(format!("log contrast must be positive, got {}", self.log_contrast)));
        }
        Ok(())
    }

    /// Pattern coordinates seen by the point `p` at time `t`.
    fn pattern_point(&self, p: [f64; 2], t: f64) -> [f64; 2] {
        match self.motion.model {
            MotionModel::Translation2d => [p[0] - self.motion.values[0] * t, p[1] - self.motion.values[1] * t],
            MotionModel::RotationInPlane => {
                let (cx, cy) = rotation_center(self.geometry);
                let (s, c) = (-self.motion.values[0] * t).sin_cos();
                let (dx, dy) = (p[0] - cx, p[1] - cy);
                [cx + c * dx - s * dy, cy + s * dx + c * dy]
            }
        }
    }

    /// Fastest image-space speed of any pattern point on the sensor.
    fn max_speed(&self) -> f64 {
        match self.motion.model {
            MotionModel::Translation2d => self.motion.values[0].hypot(self.motion.values[1]),
            MotionModel::RotationInPlane => {
                let (cx, cy) = rotation_center(self.geometry);
                self.motion.values[0].abs() * (cx + 0.5).hypot(cy + 0.5)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    /// Window `[0, duration]` referenced at its midpoint.
    pub window: EventWindow,
    pub labels: EventLabels,
    /// Ground-truth pattern motion.
    pub motion: MotionParams,
}

impl SyntheticScene {
    /// The warp parameters that collapse the signal events, `-motion`.
    pub fn compensating(&self) -> MotionParams {
        self.motion.negated()
    }
}

pub fn generate(spec: &SceneSpec, seed: u64) -> Result<SyntheticScene> {
    spec.validate()?;
    let signal = simulate(spec);
    if signal.is_empty() {
        return Err(Error::EmptyScene);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_noise = noise_count(signal.len(), spec.noise_rate);
    let g = spec.geometry;
    let noise: Vec<Event> = (0..n_noise)
        .map(|_| {
            let j = rng.random_range(0..g.width);
            let i = rng.random_range(0..g.height);
            let t = rng.random_range(0.0..=spec.duration);
            let polarity = if rng.random::<bool>() { 1 } else { -1 };
            Event {
                x: j as f64 + 0.5,
                y: i as f64 + 0.5,
                t,
                polarity,
            }
        })
        .collect();

    let mut tagged: Vec<(Event, bool)> = signal
        .into_iter()
        .map(|e| (e, true))
        .chain(noise.into_iter().map(|e| (e, false)))
        .collect();
    tagged.sort_by(|a, b| a.0.t.total_cmp(&b.0.t));
    let (events, labels): (Vec<Event>, Vec<bool>) = tagged.into_iter().unzip();
    let window = EventWindow::new(events, g, 0.0, spec.duration, 0.5 * spec.duration)?;
    Ok(SyntheticScene {
        window,
        labels: EventLabels(labels),
        motion: spec.motion.clone(),
    })
}

/// Smallest `n` with `n == round(rate * (signal + n))`.
fn noise_count(signal: usize, rate: f64) -> usize {
    if rate == 0.0 {
        return 0;
    }
    let guess = (rate * signal as f64 / (1.0 - rate)).round() as usize;
    let mut n = guess.saturating_sub(2);
    while (rate * (signal + n) as f64).round() as usize != n {
        n += 1;
    }
    n
}

/// Bisection steps used to locate a boundary crossing inside a time step.
const BISECT: usize = 48;

/// Threshold-crossing events of the moving pattern, ordered by time.
fn simulate(spec: &SceneSpec) -> Vec<Event> {
    let g = spec.geometry;
    let burst = (spec.log_contrast / spec.contrast_threshold + 1e-9).floor() as usize;
    if burst == 0 {
        return Vec::new();
    }
    let steps = ((spec.max_speed() * spec.duration / MAX_STEP_PX).ceil() as usize).max(1);
    let bright = |p: [f64; 2], t: f64| spec.pattern.is_bright(spec.pattern_point(p, t));
    let centers: Vec<[f64; 2]> = (0..g.height)
        .flat_map(|i| (0..g.width).map(move |j| [j as f64 + 0.5, i as f64 + 0.5]))
        .collect();
    let mut state: Vec<bool> = centers.iter().map(|&p| bright(p, 0.0)).collect();
    let mut events = Vec::new();
    let mut t_prev = 0.0;
    for k in 1..=steps {
        let t = spec.duration * k as f64 / steps as f64;
        let mut fired = Vec::new();
        for (idx, &p) in centers.iter().enumerate() {
            let now = bright(p, t);
            if now == state[idx] {
                continue;
            }
            let (mut lo, mut hi) = (t_prev, t);
            for _ in 0..BISECT {
                let mid = 0.5 * (lo + hi);
                if bright(p, mid) == now {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let polarity = if now { 1 } else { -1 };
            for _ in 0..burst {
                fired.push(Event {
                    x: p[0],
                    y: p[1],
                    t: hi,
                    polarity,
                });
            }
            state[idx] = now;
        }
        fired.sort_by(|a, b| a.t.total_cmp(&b.t));
        events.extend(fired);
        t_prev = t;
    }
    events
}
