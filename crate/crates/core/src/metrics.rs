//! Label-free structure score (ESR), label-based confusion rates, and motion
//! RMSE against a ground-truth trajectory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::contrast::hard_map;
use crate::error::{Error, Result};
use crate::events::{Event, EventLabels, SensorGeometry};
use crate::warp::{MotionModel, MotionParams};

/// ESR of a kept event subset.
///
/// ```text
/// N   = number of kept events inside the sensor
/// f1  = sum n_ij (n_ij - 1) / (N (N - 1))
/// f2  = HW - sum (1 - M / N)^n_ij
/// ESR = sqrt(f1 * f2)
/// ```
///
/// `n_ij` is the hard count of kept events in pixel `(i, j)`. Returns 0 when
/// `N < 2`. For `M > N` the base `1 - M/N` is clamped to 0.
pub fn esr(kept: &[Event], geometry: SensorGeometry, m_ref: usize) -> Result<f64> {
    let positions: Vec<[f64; 2]> = kept.iter().map(|e| [e.x, e.y]).collect();
    let counts: Vec<u64> = hard_map(&positions, geometry)
        .values
        .iter()
        .map(|&v| v as u64)
        .collect();
    esr_from_counts(&counts, m_ref)
}

/// ESR from per-pixel counts; the pixel count `HW` is `counts.len()`.
pub fn esr_from_counts(counts: &[u64], m_ref: usize) -> Result<f64> {
    if m_ref == 0 {
        return Err(Error::Metric("ESR reference count must be >= 1".into()));
    }
    let n: u64 = counts.iter().sum();
    if n < 2 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let pairs: f64 = counts.iter().map(|&c| (c * c.saturating_sub(1)) as f64).sum();
    let f1 = pairs / (nf * (nf - 1.0));
    let mut base = 1.0 - m_ref as f64 / nf;
    if base < 0.0 {
        warn!("ESR reference count {m_ref} exceeds kept count {n}; clamping base to 0");
        base = 0.0;
    }
    let f2 = counts.len() as f64 - counts.iter().map(|&c| powu(base, c)).sum::<f64>();
    Ok((f1 * f2).max(0.0).sqrt())
}

fn powu(base: f64, exp: u64) -> f64 {
    match i32::try_from(exp) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(exp as f64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub fp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub counts: ConfusionCounts,
    pub sensitivity: f64,
    pub specificity: f64,
    /// Set when there were no true signal events, so sensitivity is reported
    /// as 1.
    pub sensitivity_undefined: bool,
    pub specificity_undefined: bool,
}

/// Signal is the positive class.
pub fn confusion(predicted: &EventLabels, truth: &EventLabels) -> Result<Confusion> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (p, t) in predicted.iter().zip(truth.iter()) {
        match (t, p) {
            (true, true) => c.tp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fp += 1,
        }
    }
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            (1.0, true)
        } else {
            (num as f64 / den as f64, false)
        }
    };
    let (sensitivity, sensitivity_undefined) = ratio(c.tp, c.tp + c.fn_);
    let (specificity, specificity_undefined) = ratio(c.tn, c.tn + c.fp);
    Ok(Confusion {
        counts: c,
        sensitivity,
        specificity,
        sensitivity_undefined,
        specificity_undefined,
    })
}

/// Linear interpolation of a time-sorted trajectory at `t`.
pub fn interpolate(truth: &[(f64, MotionParams)], t: f64) -> Result<Vec<f64>> {
    let (first, last) = match (truth.first(), truth.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Metric("empty ground-truth trajectory".into())),
    };
    if !(t >= first.0 && t <= last.0) {
        return Err(Error::OutOfSpan {
            t,
            start: first.0,
            end: last.0,
        });
    }
    let k = truth.partition_point(|s| s.0 <= t);
    if k == truth.len() {
        return Ok(last.1.values.clone());
    }
    let (t0, a) = (&truth[k - 1].0, &truth[k - 1].1.values);
    let (t1, b) = (&truth[k].0, &truth[k].1.values);
    let u = (t - t0) / (t1 - t0);
    Ok(a.iter().zip(b).map(|(a, b)| a + u * (b - a)).collect())
}

/// `sqrt(mean_i ||est(t_i) - gt(t_i)||^2)` with the ground truth linearly
/// interpolated to each estimate's reference time.
pub fn motion_rmse(estimated: &[(f64, MotionParams)], truth: &[(f64, MotionParams)]) -> Result<f64> {
    if estimated.is_empty() {
        return Err(Error::Metric("no motion estimates".into()));
    }
    if truth.windows(2).any(|p| !(p[1].0 > p[0].0)) {
        return Err(Error::Metric("ground-truth times must be strictly increasing".into()));
    }
    let model = estimated[0].1.model;
    for (_, m) in estimated.iter().chain(truth) {
        if m.model != model || m.values.len() != model.dim() {
            return Err(Error::DimensionMismatch {
                model: model.name(),
                expected: model.dim(),
                got: m.values.len(),
            });
        }
    }
    let mut sum = 0.0;
    for (t, est) in estimated {
        let gt = interpolate(truth, *t)?;
        sum += est.values.iter().zip(&gt).map(|(e, g)| (e - g) * (e - g)).sum::<f64>();
    }
    Ok((sum / estimated.len() as f64).sqrt())
}

/// Write `t,theta...` rows with a header line.
pub fn write_trajectory(path: &Path, samples: &[(f64, MotionParams)]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    let dim = samples.first().map_or(2, |s| s.1.dim());
    let header: Vec<String> = (0..dim).map(|k| format!("theta{k}")).collect();
    writeln!(out, "t,{}", header.join(",")).map_err(io)?;
    for (t, m) in samples {
        let vals: Vec<String> = m.values.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{t},{}", vals.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Read a trajectory written by [`write_trajectory`]. One parameter per row
/// means in-plane rotation, two mean translation. A non-numeric first line is
/// treated as a header.
pub fn read_trajectory(path: &Path) -> Result<Vec<(f64, MotionParams)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut samples = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let fields = match fields {
            Ok(f) => f,
            Err(_) if k == 0 => continue,
            Err(e) => {
                return Err(Error::Malformed {
                    line: k + 1,
                    reason: e.to_string(),
                })
            }
        };
        let model = match fields.len() {
            2 => MotionModel::RotationInPlane,
            3 => MotionModel::Translation2d,
            n => {
                return Err(Error::Malformed {
                    line: k + 1,
                    reason: format!("expected 2 or 3 fields, got {n}"),
                })
            }
        };
        samples.push((fields[0], MotionParams::new(model, fields[1..].to_vec())?));
    }
    Ok(samples)
}

/// Evaluation summary written by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub esr: Option<f64>,
    pub m_ref: Option<usize>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub rmse: Option<f64>,
    pub counts: Option<ConfusionCounts>,
    pub kept: usize,
    pub total: usize,
}
