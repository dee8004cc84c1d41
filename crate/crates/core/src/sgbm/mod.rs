//! Semi-global block matching.
//!
//! Pipeline: 5x5 census transform, block-summed Hamming cost volume, 4/8-path semi-global
//! aggregation, winner-take-all with a uniqueness test and parabolic subpixel
//! refinement, left/right consistency check and speckle filtering.

mod aggregate;
mod census;
mod cost;
mod select;
mod speckle;

pub use aggregate::{aggregate_costs, PATH_DIRECTIONS};
pub use census::{census_transform, CensusImage, MAX_CENSUS_WINDOW};
pub use cost::{compute_cost_volume, compute_right_cost_volume, out_of_range_cost, CostVolume};
pub use select::{lr_consistency_filter, parabola_offset, select_curve, select_disparity};
pub use speckle::speckle_filter;

pub(crate) use select::lr_consistent_mask;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::StereoFrame;
use crate::maps::DisparityMap;
use crate::preprocess::to_grayscale;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgbmParams {
    pub min_disparity: usize,
    /// Number of candidate disparities; a positive multiple of 16.
    pub num_disparities: usize,
    /// Census window and cost block side, odd.
    pub block_size: usize,
    /// Penalty for a one-pixel disparity change along a path.
    pub p1: u32,
    /// Penalty for larger disparity jumps.
    pub p2: u32,
    /// Percent margin a non-adjacent disparity must lose by.
    pub uniqueness_ratio: u32,
    /// Minimum connected-component size kept by the speckle filter; 0 disables it.
    pub speckle_window: usize,
    pub speckle_range: f32,
    pub num_paths: usize,
    pub lr_check: bool,
    pub lr_max_diff: f32,
}

impl Default for SgbmParams {
    fn default() -> Self {
        Self {
            min_disparity: 0,
            num_disparities: 128,
            block_size: 5,
            p1: 600,
            p2: 2400,
            uniqueness_ratio: 10,
            speckle_window: 100,
            speckle_range: 32.0,
            num_paths: 8,
            lr_check: true,
            lr_max_diff: 1.0,
        }
    }
}

impl SgbmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p2 > self.p1 && self.p1 > 0) {
            return Err(Error::Param(format!(
                "penalties must satisfy p2 > p1 > 0 (p1={}, p2={})",
                self.p1, self.p2
            )));
        }
        if self.num_disparities == 0 || !self.num_disparities.is_multiple_of(16) {
            return Err(Error::Param(format!(
                "num_disparities must be a positive multiple of 16, got {}",
                self.num_disparities
            )));
        }
        census::check_window(self.block_size)?;
        if self.num_paths != 4 && self.num_paths != 8 {
            return Err(Error::Param(format!("num_paths must be 4 or 8, got {}", self.num_paths)));
        }
        if self.speckle_range.is_nan() || self.speckle_range < 0.0 || self.lr_max_diff.is_nan() || self.lr_max_diff < 0.0 {
            return Err(Error::Param("speckle_range and lr_max_diff must be non-negative".into()));
        }
        Ok(())
    }

    /// Largest candidate disparity plus one.
    pub fn max_disparity(&self) -> usize {
        self.min_disparity + self.num_disparities
    }
}

/// Intermediate and final disparity maps of one matching run.
#[derive(Debug, Clone)]
pub struct SgbmViews {
    /// Left-reference disparity after uniqueness and subpixel refinement.
    pub left: DisparityMap,
    /// Right-reference disparity, present when the left/right check ran.
    pub right: Option<DisparityMap>,
    /// `left` after the left/right check and speckle filtering.
    pub disparity: DisparityMap,
}

/// Runs the full matcher and keeps the per-view maps.
pub fn sgbm_views(frame: &StereoFrame, params: &SgbmParams) -> Result<SgbmViews> {
    params.validate()?;
    if frame.width() < params.max_disparity() {
        return Err(Error::Param(format!(
            "frame width {} is narrower than the disparity range {}",
            frame.width(),
            params.max_disparity()
        )));
    }
    let left = census_transform(&to_grayscale(&frame.left)?, params.block_size)?;
    let right = census_transform(&to_grayscale(&frame.right)?, params.block_size)?;

    let left_disp = {
        let cost = compute_cost_volume(&left, &right, params)?;
        let agg = aggregate_costs(&cost, params)?;
        drop(cost);
        select_disparity(&agg, params)
    };
    let right_disp = if params.lr_check {
        let cost = compute_right_cost_volume(&left, &right, params)?;
        let agg = aggregate_costs(&cost, params)?;
        drop(cost);
        Some(select_disparity(&agg, params))
    } else {
        None
    };
    let checked = match &right_disp {
        Some(r) => lr_consistency_filter(&left_disp, r, params.lr_max_diff)?,
        None => left_disp.clone(),
    };
    let disparity = if params.speckle_window > 0 {
        speckle_filter(&checked, params.speckle_window, params.speckle_range)
    } else {
        checked
    };
    Ok(SgbmViews { left: left_disp, right: right_disp, disparity })
}

/// Disparity of the left view of a rectified frame.
pub fn sgbm_full(frame: &StereoFrame, params: &SgbmParams) -> Result<DisparityMap> {
    Ok(sgbm_views(frame, params)?.disparity)
}
