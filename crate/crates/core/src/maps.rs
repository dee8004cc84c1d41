//! Dense disparity and depth rasters.

use crate::calib::{disparity_to_depth, CameraCalibration};
use crate::error::{Error, Result};

/// Per-pixel disparity in pixels; [`DisparityMap::INVALID`] marks pixels with no match.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl DisparityMap {
    /// Out-of-band marker. Any negative value reads as invalid.
    pub const INVALID: f32 = -1.0;

    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::Shape(format!("{} values for {width}x{height}", values.len())));
        }
        Ok(Self { width, height, values })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self { width, height, values: vec![value; width * height] }
    }

    pub fn invalid(width: usize, height: usize) -> Self {
        Self::filled(width, height, Self::INVALID)
    }

    #[inline]
    pub fn is_valid_value(d: f32) -> bool {
        d.is_finite() && d >= 0.0
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f32 {
        self.values[v * self.width + u]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, d: f32) {
        self.values[v * self.width + u] = d;
    }

    #[inline]
    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        Self::is_valid_value(self.get(u, v))
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|d| Self::is_valid_value(**d)).count()
    }

    /// Min and max over valid pixels.
    pub fn valid_range(&self) -> Option<(f32, f32)> {
        self.values
            .iter()
            .copied()
            .filter(|d| Self::is_valid_value(*d))
            .fold(None, |acc, d| match acc {
                None => Some((d, d)),
                Some((lo, hi)) => Some((lo.min(d), hi.max(d))),
            })
    }
}

/// Per-pixel metric depth; [`DepthMap::INVALID`] (NaN) marks pixels without depth.
#[derive(Debug, Clone)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl DepthMap {
    pub const INVALID: f32 = f32::NAN;

    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::Shape(format!("{} values for {width}x{height}", values.len())));
        }
        Ok(Self { width, height, values })
    }

    #[inline]
    pub fn is_valid_value(z: f32) -> bool {
        z.is_finite() && z > 0.0
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f32 {
        self.values[v * self.width + u]
    }

    pub fn valid_range(&self) -> Option<(f32, f32)> {
        self.values
            .iter()
            .copied()
            .filter(|z| Self::is_valid_value(*z))
            .fold(None, |acc, z| match acc {
                None => Some((z, z)),
                Some((lo, hi)) => Some((lo.min(z), hi.max(z))),
            })
    }
}

/// NaN-aware equality: invalid pixels compare equal to each other.
impl PartialEq for DepthMap {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()))
    }
}

/// Element-wise triangulation; invalid and non-positive disparities become invalid depth.
pub fn disparity_map_to_depth_map(disp: &DisparityMap, calib: &CameraCalibration) -> Result<DepthMap> {
    if disp.dims() != (calib.width, calib.height) {
        return Err(Error::Shape(format!(
            "disparity {:?} vs calibration {}x{}",
            disp.dims(),
            calib.width,
            calib.height
        )));
    }
    let values = disp
        .values()
        .iter()
        .map(|&d| match disparity_to_depth(d as f64, calib) {
            Ok(z) => z as f32,
            Err(_) => DepthMap::INVALID,
        })
        .collect();
    DepthMap::new(disp.width, disp.height, values)
}
