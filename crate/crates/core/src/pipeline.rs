//! The per-frame pipeline: preprocess, match, refine, triangulate, fuse.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fusion::{localize_branches, FusionParams, Localization};
use crate::image::{ImageBuffer, StereoFrame};
use crate::maps::{disparity_map_to_depth_map, DepthMap, DisparityMap};
use crate::mask::SegmentMask;
use crate::preprocess::{preprocess, PreprocessConfig};
use crate::sgbm::{sgbm_views, SgbmParams};
use crate::wls::{confidence_from_lr, wls_refine, WlsParams};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineParams {
    pub preprocess: PreprocessConfig,
    pub sgbm: SgbmParams,
    pub wls: WlsParams,
    /// Run WLS refinement; when off the refined map equals the raw map.
    pub wls_enabled: bool,
    pub fusion: FusionParams,
}

impl PipelineParams {
    pub fn with_defaults() -> Self {
        Self { wls_enabled: true, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct DisparityResult {
    /// Matcher output after the left/right check and speckle filter.
    pub raw: DisparityMap,
    pub refined: DisparityMap,
    /// Per-pixel WLS data weight (1 where `raw` is valid and consistent).
    pub confidence: Vec<f32>,
    /// Preprocessed left view, used as the WLS guide.
    pub guide: ImageBuffer,
}

pub fn compute_disparity(frame: &StereoFrame, params: &PipelineParams) -> Result<DisparityResult> {
    params.preprocess.validate()?;
    let left = preprocess(&frame.left, &params.preprocess)?;
    let right = preprocess(&frame.right, &params.preprocess)?;
    let processed = StereoFrame::new(left, right, frame.calibration)?;
    let views = sgbm_views(&processed, &params.sgbm)?;
    let raw = views.disparity;

    let mut confidence = match &views.right {
        Some(right) => confidence_from_lr(&views.left, right, params.sgbm.lr_max_diff)?,
        None => vec![1.0; raw.values().len()],
    };
    for (c, &d) in confidence.iter_mut().zip(raw.values()) {
        if !DisparityMap::is_valid_value(d) {
            *c = 0.0;
        }
    }
    let guide = processed.left;
    let refined = if params.wls_enabled {
        wls_refine(&raw, &guide, &confidence, &params.wls)?
    } else {
        raw.clone()
    };
    Ok(DisparityResult { raw, refined, confidence, guide })
}

/// Refined disparity where the raw match was valid; hole-filled pixels are
/// marked invalid so they do not count as depth support.
pub fn supported_disparity(result: &DisparityResult) -> DisparityMap {
    let values = result
        .refined
        .values()
        .iter()
        .zip(result.raw.values())
        .map(|(&r, &d)| if DisparityMap::is_valid_value(d) { r } else { DisparityMap::INVALID })
        .collect();
    DisparityMap::new(result.raw.width(), result.raw.height(), values).expect("same dimensions")
}

#[derive(Debug, Clone)]
pub struct LocalizeResult {
    pub disparity: DisparityResult,
    pub depth: DepthMap,
    pub localization: Localization,
}

pub fn localize_frame(
    frame: &StereoFrame,
    masks: &[SegmentMask],
    params: &PipelineParams,
) -> Result<LocalizeResult> {
    let disparity = compute_disparity(frame, params)?;
    let depth = disparity_map_to_depth_map(&supported_disparity(&disparity), &frame.calibration)?;
    let localization =
        localize_branches(masks, &depth, &frame.calibration, params.fusion.min_valid_ratio);
    Ok(LocalizeResult { disparity, depth, localization })
}
