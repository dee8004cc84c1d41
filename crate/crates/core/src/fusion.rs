//! Per-instance depth extraction, robust statistics and 3D localization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calib::{back_project, CameraCalibration, Point3D};
use crate::error::{Error, Result};
use crate::maps::DepthMap;
use crate::mask::SegmentMask;

/// Consistency constant turning a median absolute deviation into a normal sigma.
pub const MAD_SCALE: f64 = 1.4826;
/// Consistency constant for the mean absolute deviation, used when the MAD is zero.
pub const MEAN_AD_SCALE: f64 = 1.253314;
/// Samples farther than this many robust sigmas from the median are dropped.
pub const OUTLIER_CUTOFF: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionParams {
    pub min_valid_ratio: f64,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self { min_valid_ratio: 0.25 }
    }
}

/// A mask pixel with valid depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthSample {
    pub u: usize,
    pub v: usize,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchEstimate {
    pub instance_id: u32,
    pub label: String,
    pub score: f64,
    pub pixel_count: usize,
    pub valid_count: usize,
    /// Samples dropped by the outlier test.
    pub outlier_count: usize,
    pub valid_ratio: f64,
    pub mean_depth: f64,
    pub median_depth: f64,
    pub std_depth: f64,
    pub centroid: Point3D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub instance_id: u32,
    pub reason: String,
}

/// Output of [`localize_branches`]: one entry per mask, in input order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Localization {
    pub estimates: Vec<BranchEstimate>,
    pub exclusions: Vec<Exclusion>,
}

/// Pairs every mask pixel with its depth, skipping pixels without valid depth.
pub fn register_mask(mask: &SegmentMask, depth: &DepthMap) -> Result<Vec<DepthSample>> {
    if mask.mask.dims() != depth.dims() {
        return Err(Error::Shape(format!(
            "mask {} is {:?}, depth map is {:?}",
            mask.instance_id,
            mask.mask.dims(),
            depth.dims()
        )));
    }
    Ok(mask
        .mask
        .pixels()
        .filter_map(|(u, v)| {
            let z = depth.get(u, v);
            DepthMap::is_valid_value(z).then_some(DepthSample { u, v, depth: z as f64 })
        })
        .collect())
}

/// Median of `values`, sorting them in place. Mean of the middle pair for even counts.
pub fn median_in_place(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty set");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Robust spread around `median`: `1.4826 * MAD`, or `1.253314 * mean absolute
/// deviation` when the MAD is zero. Zero means no spread to test against.
pub fn robust_scale(depths: &[f64], median: f64) -> f64 {
    let mut dev: Vec<f64> = depths.iter().map(|z| (z - median).abs()).collect();
    let mad = median_in_place(&mut dev);
    if mad > 0.0 {
        MAD_SCALE * mad
    } else {
        MEAN_AD_SCALE * dev.iter().sum::<f64>() / dev.len() as f64
    }
}

/// Depth statistics for one instance.
///
/// Samples deviating from the median by more than three robust sigmas are
/// dropped before computing the mean, median and population standard
/// deviation. The centroid back-projects the mean pixel of the kept samples
/// at the median depth.
pub fn summarize(
    mask: &SegmentMask,
    samples: &[DepthSample],
    calib: &CameraCalibration,
    min_valid_ratio: f64,
    pixel_count: usize,
) -> Result<BranchEstimate> {
    if pixel_count == 0 {
        return Err(Error::InsufficientDepth { valid_ratio: 0.0, required: min_valid_ratio });
    }
    let valid_ratio = samples.len() as f64 / pixel_count as f64;
    if samples.is_empty() || valid_ratio < min_valid_ratio {
        return Err(Error::InsufficientDepth { valid_ratio, required: min_valid_ratio });
    }

    let mut depths: Vec<f64> = samples.iter().map(|s| s.depth).collect();
    let median = median_in_place(&mut depths);
    let scale = robust_scale(&depths, median);
    let kept: Vec<&DepthSample> = samples
        .iter()
        .filter(|s| scale == 0.0 || (s.depth - median).abs() <= OUTLIER_CUTOFF * scale)
        .collect();

    let n = kept.len() as f64;
    let mut kept_depths: Vec<f64> = kept.iter().map(|s| s.depth).collect();
    let mean = kept_depths.iter().sum::<f64>() / n;
    let var = kept_depths.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / n;
    let median = median_in_place(&mut kept_depths);
    let mean_u = kept.iter().map(|s| s.u as f64).sum::<f64>() / n;
    let mean_v = kept.iter().map(|s| s.v as f64).sum::<f64>() / n;

    Ok(BranchEstimate {
        instance_id: mask.instance_id,
        label: mask.label.clone(),
        score: mask.score,
        pixel_count,
        valid_count: samples.len(),
        outlier_count: samples.len() - kept.len(),
        valid_ratio,
        mean_depth: mean,
        median_depth: median,
        std_depth: var.sqrt(),
        centroid: back_project(mean_u, mean_v, median, calib)?,
    })
}

/// Localizes every mask independently. Masks that fail are listed as exclusions.
pub fn localize_branches(
    masks: &[SegmentMask],
    depth: &DepthMap,
    calib: &CameraCalibration,
    min_valid_ratio: f64,
) -> Localization {
    let results: Vec<Result<BranchEstimate>> = masks
        .par_iter()
        .map(|m| {
            let samples = register_mask(m, depth)?;
            summarize(m, &samples, calib, min_valid_ratio, m.pixel_count())
        })
        .collect();
    let mut out = Localization::default();
    for (mask, result) in masks.iter().zip(results) {
        match result {
            Ok(e) => out.estimates.push(e),
            Err(e) => out.exclusions.push(Exclusion { instance_id: mask.instance_id, reason: e.to_string() }),
        }
    }
    out
}
