//! Contrast maps (images of warped events), confidence maps, their variance,
//! and analytic gradients through the Gaussian splat.
//!
//! Cell `(i, j)` covers `[j, j+1) x [i, i+1)`; maps are stored row-major.
//! Polarity is ignored everywhere in this module.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::SensorGeometry;

/// Events per accumulation chunk. Partial maps are summed in chunk order, so
/// results do not depend on the thread count.
const CHUNK: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastMap {
    pub geometry: SensorGeometry,
    pub values: Vec<f64>,
}

impl ContrastMap {
    pub fn zeros(geometry: SensorGeometry) -> Self {
        ContrastMap {
            geometry,
            values: vec![0.0; geometry.pixel_count()],
        }
    }

    pub fn from_values(geometry: SensorGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.pixel_count() {
            return Err(Error::LengthMismatch {
                left: geometry.pixel_count(),
                right: values.len(),
            });
        }
        Ok(ContrastMap { geometry, values })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.geometry.width + j]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    fn check_shape(&self, other: SensorGeometry) -> Result<()> {
        if self.geometry != other {
            return Err(Error::ShapeMismatch {
                expected_w: self.geometry.width,
                expected_h: self.geometry.height,
                got_w: other.width,
                got_h: other.height,
            });
        }
        Ok(())
    }
}

/// Per-pixel signal confidences `w = sigmoid(logit)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceMap {
    pub geometry: SensorGeometry,
    pub logits: Vec<f64>,
}

impl ConfidenceMap {
    pub fn filled(geometry: SensorGeometry, logit: f64) -> Self {
        ConfidenceMap {
            geometry,
            logits: vec![logit; geometry.pixel_count()],
        }
    }

    pub fn from_logits(geometry: SensorGeometry, logits: Vec<f64>) -> Result<Self> {
        if logits.len() != geometry.pixel_count() {
            return Err(Error::LengthMismatch {
                left: geometry.pixel_count(),
                right: logits.len(),
            });
        }
        Ok(ConfidenceMap { geometry, logits })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.logits.iter().map(|&l| sigmoid(l)).collect()
    }

    /// Bilinear interpolation of the weights, which live at pixel centers.
    /// Points beyond the outermost centers take the border value.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let (w, h) = (self.geometry.width, self.geometry.height);
        let u = (x - 0.5).clamp(0.0, (w - 1) as f64);
        let v = (y - 0.5).clamp(0.0, (h - 1) as f64);
        let (j0, i0) = (u.floor() as usize, v.floor() as usize);
        let (j1, i1) = ((j0 + 1).min(w - 1), (i0 + 1).min(h - 1));
        let (fu, fv) = (u - j0 as f64, v - i0 as f64);
        let at = |i: usize, j: usize| sigmoid(self.logits[i * w + j]);
        (1.0 - fv) * ((1.0 - fu) * at(i0, j0) + fu * at(i0, j1))
            + fv * ((1.0 - fu) * at(i1, j0) + fu * at(i1, j1))
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Isotropic Gaussian evaluated at pixel centers. Exact out to `3 sigma`,
/// then rolled off to zero at `4 sigma` with a quintic smoothstep so the map
/// stays twice differentiable in the event positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    sigma: f64,
    inv_two_var: f64,
    inv_var: f64,
    norm: f64,
    taper_start: f64,
    support: f64,
}

impl GaussianKernel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidSigma(sigma));
        }
        let var = sigma * sigma;
        Ok(GaussianKernel {
            sigma,
            inv_two_var: 0.5 / var,
            inv_var: 1.0 / var,
            norm: 1.0 / (2.0 * std::f64::consts::PI * var),
            taper_start: 3.0 * sigma,
            support: 4.0 * sigma,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Radius beyond which the kernel is exactly zero.
    pub fn support(&self) -> f64 {
        self.support
    }

    /// Kernel value for offset `d = center - position`.
    pub fn value(&self, dx: f64, dy: f64) -> f64 {
        let r2 = dx * dx + dy * dy;
        if r2 >= self.support * self.support {
            return 0.0;
        }
        let g = self.norm * (-r2 * self.inv_two_var).exp();
        g * self.taper(r2.sqrt()).0
    }

    /// `(taper, d taper / dr)`
    #[inline]
    fn taper(&self, r: f64) -> (f64, f64) {
        if r <= self.taper_start {
            return (1.0, 0.0);
        }
        let width = self.support - self.taper_start;
        let s = (r - self.taper_start) / width;
        let step = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
        let dstep = 30.0 * s * s * (1.0 - s) * (1.0 - s) / width;
        (1.0 - step, -dstep)
    }

    /// Inclusive range of cell indices whose centers lie within the support
    /// of a kernel at coordinate `p` along an axis of `n` cells.
    #[inline]
    fn cell_range(&self, p: f64, n: usize) -> Option<(usize, usize)> {
        let lo = (p - 0.5 - self.support).ceil().max(0.0);
        let hi = (p - 0.5 + self.support).floor().min(n as f64 - 1.0);
        (lo <= hi && hi >= 0.0).then_some((lo as usize, hi as usize))
    }

    /// Visit every cell in the support of a kernel at `p`, passing the row
    /// major index, the offset `d = center - p`, the Gaussian factor, and `r^2`.
    #[inline]
    fn for_each_cell(
        &self,
        p: [f64; 2],
        geometry: SensorGeometry,
        gx: &mut Vec<f64>,
        mut visit: impl FnMut(usize, f64, f64, f64, f64),
    ) {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return;
        }
        let (Some((j0, j1)), Some((i0, i1))) = (
            self.cell_range(p[0], geometry.width),
            self.cell_range(p[1], geometry.height),
        ) else {
            return;
        };
        let support2 = self.support * self.support;
        gx.clear();
        gx.extend((j0..=j1).map(|j| {
            let dx = j as f64 + 0.5 - p[0];
            (-dx * dx * self.inv_two_var).exp()
        }));
        for i in i0..=i1 {
            let dy = i as f64 + 0.5 - p[1];
            let gy = self.norm * (-dy * dy * self.inv_two_var).exp();
            let row = i * geometry.width;
            for (j, &gxj) in (j0..=j1).zip(gx.iter()) {
                let dx = j as f64 + 0.5 - p[0];
                let r2 = dx * dx + dy * dy;
                if r2 < support2 {
                    visit(row + j, dx, dy, gxj * gy, r2);
                }
            }
        }
    }

    fn splat_into(&self, positions: &[[f64; 2]], geometry: SensorGeometry, out: &mut [f64]) {
        let mut scratch = Vec::new();
        for &p in positions {
            self.for_each_cell(p, geometry, &mut scratch, |idx, _, _, g, r2| {
                out[idx] += g * self.taper(r2.sqrt()).0;
            });
        }
    }

    /// `d/dp` of `sum_ij adjoint_ij * K(c_ij - p)`.
    fn adjoint_at(
        &self,
        p: [f64; 2],
        geometry: SensorGeometry,
        adjoint: &[f64],
        scratch: &mut Vec<f64>,
    ) -> [f64; 2] {
        let mut grad = [0.0; 2];
        let inner2 = self.taper_start * self.taper_start;
        self.for_each_cell(p, geometry, scratch, |idx, dx, dy, g, r2| {
            let a = adjoint[idx];
            if a == 0.0 {
                return;
            }
            // dK/dp = d * G * (T / sigma^2 - T'(r) / r)
            let factor = if r2 <= inner2 {
                self.inv_var
            } else {
                let r = r2.sqrt();
                let (t, dt) = self.taper(r);
                t * self.inv_var - dt / r
            };
            let s = a * g * factor;
            grad[0] += s * dx;
            grad[1] += s * dy;
        });
        grad
    }
}

/// Hard-count map: cell `(i, j)` counts positions with `floor(x) = j`,
/// `floor(y) = i`. Positions outside the sensor are dropped.
pub fn hard_map(positions: &[[f64; 2]], geometry: SensorGeometry) -> ContrastMap {
    let mut map = ContrastMap::zeros(geometry);
    for p in positions {
        if let Some(idx) = geometry.cell_of(p[0], p[1]) {
            map.values[idx] += 1.0;
        }
    }
    map
}

pub fn smooth_map(positions: &[[f64; 2]], geometry: SensorGeometry, sigma: f64) -> Result<ContrastMap> {
    let kernel = GaussianKernel::new(sigma)?;
    Ok(splat(positions, geometry, &kernel))
}

pub fn splat(positions: &[[f64; 2]], geometry: SensorGeometry, kernel: &GaussianKernel) -> ContrastMap {
    let mut map = ContrastMap::zeros(geometry);
    if positions.len() <= CHUNK {
        kernel.splat_into(positions, geometry, &mut map.values);
        return map;
    }
    let partials: Vec<Vec<f64>> = positions
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut part = vec![0.0; geometry.pixel_count()];
            kernel.splat_into(chunk, geometry, &mut part);
            part
        })
        .collect();
    for part in partials {
        for (acc, v) in map.values.iter_mut().zip(part) {
            *acc += v;
        }
    }
    map
}

/// Gradient of `sum_ij adjoint_ij * [splat(positions)]_ij` with respect to
/// every position.
pub fn splat_adjoint(
    positions: &[[f64; 2]],
    geometry: SensorGeometry,
    kernel: &GaussianKernel,
    adjoint: &[f64],
) -> Vec<[f64; 2]> {
    debug_assert_eq!(adjoint.len(), geometry.pixel_count());
    positions
        .par_chunks(CHUNK)
        .flat_map_iter(|chunk| {
            let mut scratch = Vec::new();
            chunk
                .iter()
                .map(|&p| kernel.adjoint_at(p, geometry, adjoint, &mut scratch))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Elementwise `w_ij * map_ij`.
pub fn weighted_map(map: &ContrastMap, conf: &ConfidenceMap) -> Result<ContrastMap> {
    map.check_shape(conf.geometry)?;
    let values = map
        .values
        .iter()
        .zip(&conf.logits)
        .map(|(&m, &l)| sigmoid(l) * m)
        .collect();
    Ok(ContrastMap {
        geometry: map.geometry,
        values,
    })
}

/// Population variance over all cells.
pub fn map_variance(map: &ContrastMap) -> f64 {
    variance(&map.values)
}

pub(crate) fn variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// `d var(values) / d values_ij = 2 (values_ij - mean) / n`
pub(crate) fn variance_adjoint(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| 2.0 * (v - mean) / n).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceGradients {
    pub positions: Vec<[f64; 2]>,
    pub logits: Vec<f64>,
}

/// Analytic gradients of `var(w ∘ smooth_map(positions))` with respect to
/// each position and each confidence logit.
pub fn variance_gradients(
    positions: &[[f64; 2]],
    conf: &ConfidenceMap,
    geometry: SensorGeometry,
    sigma: f64,
) -> Result<VarianceGradients> {
    let kernel = GaussianKernel::new(sigma)?;
    let map = splat(positions, geometry, &kernel);
    map.check_shape(conf.geometry)?;
    let weights = conf.weights();
    let weighted: Vec<f64> = map.values.iter().zip(&weights).map(|(m, w)| m * w).collect();
    let adj = variance_adjoint(&weighted);

    let map_adjoint: Vec<f64> = adj.iter().zip(&weights).map(|(a, w)| a * w).collect();
    let logits = adj
        .iter()
        .zip(&map.values)
        .zip(&weights)
        .map(|((a, m), w)| a * m * w * (1.0 - w))
        .collect();
    Ok(VarianceGradients {
        positions: splat_adjoint(positions, geometry, &kernel, &map_adjoint),
        logits,
    })
}
