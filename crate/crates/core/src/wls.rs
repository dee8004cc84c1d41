//! Edge-preserving weighted-least-squares disparity refinement.
//!
//! Minimizes
//!
//! ```text
//! E(u) = sum_p c(p) (u(p) - d(p))^2 + lambda * sum_{p~q} w(p,q) (u(p) - u(q))^2
//! w(p,q) = exp(-|I(p) - I(q)| / sigma_color),   I in [0, 1]
//! ```
//!
//! over 4-connected neighbors with a fixed number of lexicographic
//! Gauss-Seidel sweeps. Holes are pre-filled from the nearest valid pixel on
//! the same scanline, so the solver starts from a finite estimate and the
//! output covers every pixel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::maps::DisparityMap;
use crate::sgbm::lr_consistent_mask;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WlsParams {
    pub lambda: f64,
    /// Edge sensitivity on guide intensities normalized to `[0, 1]`.
    pub sigma_color: f64,
    pub iterations: usize,
}

impl Default for WlsParams {
    fn default() -> Self {
        Self { lambda: 8000.0, sigma_color: 0.01, iterations: 25 }
    }
}

impl WlsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Param(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.sigma_color > 0.0 && self.sigma_color.is_finite()) {
            return Err(Error::Param(format!("sigma_color must be > 0, got {}", self.sigma_color)));
        }
        if self.iterations == 0 {
            return Err(Error::Param("iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Binary confidence: 1 where the left disparity passes the left/right check, else 0.
pub fn confidence_from_lr(left: &DisparityMap, right: &DisparityMap, max_diff: f32) -> Result<Vec<f32>> {
    Ok(lr_consistent_mask(left, right, max_diff)?
        .into_iter()
        .map(|ok| if ok { 1.0 } else { 0.0 })
        .collect())
}

/// Guide-dependent smoothness weights between horizontal and vertical neighbors.
pub struct WlsWeights {
    width: usize,
    height: usize,
    /// `horizontal[v * width + u]` couples `(u, v)` and `(u + 1, v)`.
    horizontal: Vec<f64>,
    /// `vertical[v * width + u]` couples `(u, v)` and `(u, v + 1)`.
    vertical: Vec<f64>,
}

impl WlsWeights {
    pub fn new(guide: &ImageBuffer, sigma_color: f64) -> Result<Self> {
        guide.require_gray("WLS guide")?;
        let (w, h) = guide.dims();
        let weight = |a: u8, b: u8| (-((a as f64 - b as f64).abs() / 255.0) / sigma_color).exp();
        let mut horizontal = vec![0.0; w * h];
        let mut vertical = vec![0.0; w * h];
        for v in 0..h {
            for u in 0..w {
                if u + 1 < w {
                    horizontal[v * w + u] = weight(guide.get(u, v), guide.get(u + 1, v));
                }
                if v + 1 < h {
                    vertical[v * w + u] = weight(guide.get(u, v), guide.get(u, v + 1));
                }
            }
        }
        Ok(Self { width: w, height: h, horizontal, vertical })
    }

    pub fn horizontal(&self, u: usize, v: usize) -> f64 {
        self.horizontal[v * self.width + u]
    }

    pub fn vertical(&self, u: usize, v: usize) -> f64 {
        self.vertical[v * self.width + u]
    }

    /// Calls `f(p, q, w)` once per adjacent pixel pair.
    pub fn for_each_edge(&self, mut f: impl FnMut(usize, usize, f64)) {
        let w = self.width;
        for v in 0..self.height {
            for u in 0..w {
                let p = v * w + u;
                if u + 1 < w {
                    f(p, p + 1, self.horizontal[p]);
                }
                if v + 1 < self.height {
                    f(p, p + w, self.vertical[p]);
                }
            }
        }
    }
}

/// Value of the WLS objective for `solution`.
pub fn wls_energy(
    solution: &[f64],
    disp: &DisparityMap,
    conf: &[f32],
    weights: &WlsWeights,
    lambda: f64,
) -> f64 {
    let data: f64 = solution
        .iter()
        .zip(disp.values())
        .zip(conf)
        .filter(|(_, &c)| c > 0.0)
        .map(|((&x, &d), &c)| c as f64 * (x - d as f64).powi(2))
        .sum();
    let mut smooth = 0.0;
    weights.for_each_edge(|p, q, w| smooth += w * (solution[p] - solution[q]).powi(2));
    data + lambda * smooth
}

/// Replaces invalid pixels with the nearest valid value on the same row
/// (left neighbor on ties); rows without any valid pixel copy the nearest
/// filled row.
pub fn scanline_fill(disp: &DisparityMap) -> Result<Vec<f64>> {
    let (w, h) = disp.dims();
    let mut out = vec![0.0; w * h];
    let mut filled_rows = vec![false; h];
    for v in 0..h {
        let row = &disp.values()[v * w..(v + 1) * w];
        let mut last_valid: Option<usize> = None;
        let mut next_valid = vec![None; w];
        let mut next = None;
        for u in (0..w).rev() {
            if DisparityMap::is_valid_value(row[u]) {
                next = Some(u);
            }
            next_valid[u] = next;
        }
        if next_valid[0].is_none() {
            continue;
        }
        filled_rows[v] = true;
        for u in 0..w {
            if DisparityMap::is_valid_value(row[u]) {
                last_valid = Some(u);
                out[v * w + u] = row[u] as f64;
                continue;
            }
            let src = match (last_valid, next_valid[u]) {
                (Some(l), Some(r)) => if u - l <= r - u { l } else { r },
                (Some(l), None) => l,
                (None, Some(r)) => r,
                (None, None) => unreachable!("row has a valid pixel"),
            };
            out[v * w + u] = row[src] as f64;
        }
    }
    if !filled_rows.iter().any(|&f| f) {
        return Err(Error::NoValidData);
    }
    for v in 0..h {
        if filled_rows[v] {
            continue;
        }
        let src = (0..h)
            .filter(|&r| filled_rows[r])
            .min_by_key(|&r| (r.abs_diff(v), r))
            .expect("at least one filled row");
        out.copy_within(src * w..(src + 1) * w, v * w);
    }
    Ok(out)
}

pub(crate) fn check_inputs(disp: &DisparityMap, guide: &ImageBuffer, conf: &[f32]) -> Result<()> {
    guide.require_gray("WLS guide")?;
    if guide.dims() != disp.dims() {
        return Err(Error::Shape(format!("guide {:?} vs disparity {:?}", guide.dims(), disp.dims())));
    }
    if conf.len() != disp.values().len() {
        return Err(Error::Shape(format!(
            "{} confidence values for {} pixels",
            conf.len(),
            disp.values().len()
        )));
    }
    for (i, (&c, &d)) in conf.iter().zip(disp.values()).enumerate() {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Param(format!("confidence {c} at pixel {i} outside [0, 1]")));
        }
        if c > 0.0 && !DisparityMap::is_valid_value(d) {
            return Err(Error::Param(format!("positive confidence at invalid pixel {i}")));
        }
    }
    Ok(())
}

/// Runs the Gauss-Seidel sweeps in place on `solution`.
pub(crate) fn gauss_seidel(
    solution: &mut [f64],
    disp: &DisparityMap,
    conf: &[f32],
    weights: &WlsWeights,
    lambda: f64,
    sweeps: usize,
    mut after_sweep: impl FnMut(&[f64]),
) {
    let (w, h) = disp.dims();
    let d = disp.values();
    for _ in 0..sweeps {
        for v in 0..h {
            for u in 0..w {
                let p = v * w + u;
                let c = conf[p] as f64;
                let mut num = if c > 0.0 { c * d[p] as f64 } else { 0.0 };
                let mut den = c;
                let mut couple = |q: usize, wt: f64| {
                    num += lambda * wt * solution[q];
                    den += lambda * wt;
                };
                if u > 0 {
                    couple(p - 1, weights.horizontal[p - 1]);
                }
                if u + 1 < w {
                    couple(p + 1, weights.horizontal[p]);
                }
                if v > 0 {
                    couple(p - w, weights.vertical[p - w]);
                }
                if v + 1 < h {
                    couple(p + w, weights.vertical[p]);
                }
                if den > 0.0 {
                    solution[p] = num / den;
                }
            }
        }
        after_sweep(solution);
    }
}

/// Refines `disp` guided by `guide`, weighting the data term by `conf`.
/// The result is defined at every pixel.
pub fn wls_refine(
    disp: &DisparityMap,
    guide: &ImageBuffer,
    conf: &[f32],
    params: &WlsParams,
) -> Result<DisparityMap> {
    params.validate()?;
    check_inputs(disp, guide, conf)?;
    let weights = WlsWeights::new(guide, params.sigma_color)?;
    let mut solution = scanline_fill(disp)?;
    gauss_seidel(&mut solution, disp, conf, &weights, params.lambda, params.iterations, |_| {});
    let values = solution.iter().map(|&x| x as f32).collect();
    DisparityMap::new(disp.width(), disp.height(), values)
}
