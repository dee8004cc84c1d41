use crate::calib::CameraCalibration;
use crate::error::{Error, Result};

/// Row-major 8-bit raster with one (gray) or three (RGB) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!("empty image {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Format(format!("{channels} channels (expected 1 or 3)")));
        }
        if samples.len() != width * height * channels {
            return Err(Error::Shape(format!(
                "{} samples for {width}x{height}x{channels}",
                samples.len()
            )));
        }
        Ok(Self { width, height, channels, samples })
    }

    pub fn gray(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        Self::new(width, height, 1, samples)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::gray(width, height, vec![value; width * height])
    }

    /// Builds a gray image by evaluating `f(u, v)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                samples.push(f(u, v));
            }
        }
        Self::gray(width, height, samples)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    /// First channel of pixel `(u, v)`.
    #[inline]
    pub fn get(&self, u: usize, v: usize) -> u8 {
        self.samples[(v * self.width + u) * self.channels]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: u8) {
        let i = (v * self.width + u) * self.channels;
        self.samples[i] = value;
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub(crate) fn require_gray(&self, what: &str) -> Result<()> {
        if self.channels != 1 {
            return Err(Error::Format(format!(
                "{what} requires a 1-channel image, got {} channels",
                self.channels
            )));
        }
        Ok(())
    }
}

/// A rectified left/right pair with its calibration.
#[derive(Debug, Clone)]
pub struct StereoFrame {
    pub left: ImageBuffer,
    pub right: ImageBuffer,
    pub calibration: CameraCalibration,
}

impl StereoFrame {
    pub fn new(left: ImageBuffer, right: ImageBuffer, calibration: CameraCalibration) -> Result<Self> {
        if left.dims() != right.dims() {
            return Err(Error::Shape(format!(
                "left {:?} and right {:?} differ",
                left.dims(),
                right.dims()
            )));
        }
        if left.dims() != (calibration.width, calibration.height) {
            return Err(Error::Shape(format!(
                "images {:?} do not match calibration {}x{}",
                left.dims(),
                calibration.width,
                calibration.height
            )));
        }
        Ok(Self { left, right, calibration })
    }

    pub fn width(&self) -> usize {
        self.left.width()
    }

    pub fn height(&self) -> usize {
        self.left.height()
    }
}
