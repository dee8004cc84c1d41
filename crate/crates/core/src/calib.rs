//! Pinhole stereo calibration and disparity/depth triangulation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Intrinsics of the (rectified) left camera plus the stereo baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraCalibration {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Distance between optical centers, meters.
    #[serde(rename = "baseline_m")]
    pub baseline: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraCalibration {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        baseline: f64,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let calib = Self { fx, fy, cx, cy, baseline, width, height };
        calib.validate()?;
        Ok(calib)
    }

    /// Calibration with the principal point at the image center and square pixels.
    pub fn centered(focal: f64, baseline: f64, width: usize, height: usize) -> Result<Self> {
        Self::new(focal, focal, width as f64 / 2.0, height as f64 / 2.0, baseline, width, height)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.fx, self.fy, self.cx, self.cy, self.baseline]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Calibration("non-finite parameter".into()));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::Calibration(format!(
                "focal lengths must be positive (fx={}, fy={})",
                self.fx, self.fy
            )));
        }
        if self.baseline <= 0.0 {
            return Err(Error::Calibration(format!(
                "baseline must be positive, got {}",
                self.baseline
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Calibration("image size must be non-zero".into()));
        }
        if !(0.0..self.width as f64).contains(&self.cx) || !(0.0..self.height as f64).contains(&self.cy)
        {
            return Err(Error::Calibration(format!(
                "principal point ({}, {}) outside {}x{} image",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }

    /// `baseline * fx`, the numerator of the triangulation relation.
    #[inline]
    pub fn focal_baseline(&self) -> f64 {
        self.baseline * self.fx
    }

    /// Depth in meters for a disparity in pixels.
    pub fn disparity_to_depth(&self, disparity: f64) -> Result<f64> {
        disparity_to_depth(disparity, self)
    }

    /// Disparity in pixels for a depth in meters.
    pub fn depth_to_disparity(&self, depth: f64) -> Result<f64> {
        depth_to_disparity(depth, self)
    }
}

/// A point in the left camera frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// `z = b * fx / d`. Non-positive or non-finite disparities carry no depth.
pub fn disparity_to_depth(disparity: f64, calib: &CameraCalibration) -> Result<f64> {
    if !disparity.is_finite() || disparity <= 0.0 {
        return Err(Error::NoDepth(disparity));
    }
    Ok(calib.focal_baseline() / disparity)
}

/// `d = b * fx / z`.
pub fn depth_to_disparity(depth: f64, calib: &CameraCalibration) -> Result<f64> {
    if !depth.is_finite() || depth <= 0.0 {
        return Err(Error::InvalidDepth(depth));
    }
    Ok(calib.focal_baseline() / depth)
}

/// Pinhole back-projection of pixel `(u, v)` at depth `z`.
pub fn back_project(u: f64, v: f64, z: f64, calib: &CameraCalibration) -> Result<Point3D> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::InvalidDepth(z));
    }
    Ok(Point3D {
        x: (u - calib.cx) * z / calib.fx,
        y: (v - calib.cy) * z / calib.fy,
        z,
    })
}
