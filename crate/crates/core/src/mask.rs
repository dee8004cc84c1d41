//! Instance masks in left-image coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box in pixel-edge coordinates: a pixel `(u, v)` covers
/// `[u, u + 1) x [v, v + 1)`, so the tight box of a single pixel has area 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    pub const EMPTY: BBox = BBox { x_min: 0.0, y_min: 0.0, x_max: 0.0, y_max: 0.0 };

    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self { x_min, y_min, x_max, y_max }
    }

    pub fn is_well_formed(&self) -> bool {
        self.x_min <= self.x_max && self.y_min <= self.y_max
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min).max(0.0) * (self.y_max - self.y_min).max(0.0)
    }
}

impl From<[f64; 4]> for BBox {
    fn from(b: [f64; 4]) -> Self {
        Self::new(b[0], b[1], b[2], b[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x_min, b.y_min, b.x_max, b.y_max]
    }
}

/// Dense binary raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Shape(format!("{} mask cells for {width}x{height}", bits.len())));
        }
        Ok(Self { width, height, bits })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![false; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                bits.push(f(u, v));
            }
        }
        Self { width, height, bits }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> bool {
        self.bits[v * self.width + u]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, on: bool) {
        self.bits[v * self.width + u] = on;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Set pixels as `(u, v)` in raster order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i % w, i / w))
    }

    /// Tight box of the set pixels; [`BBox::EMPTY`] for an empty mask.
    pub fn tight_bbox(&self) -> BBox {
        let mut it = self.pixels();
        let Some((u0, v0)) = it.next() else {
            return BBox::EMPTY;
        };
        let (mut x0, mut y0, mut x1, mut y1) = (u0, v0, u0, v0);
        for (u, v) in it {
            x0 = x0.min(u);
            x1 = x1.max(u);
            y0 = y0.min(v);
            y1 = y1.max(v);
        }
        BBox::new(x0 as f64, y0 as f64, (x1 + 1) as f64, (y1 + 1) as f64)
    }
}

/// One detected (or annotated) instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMask {
    pub instance_id: u32,
    pub label: String,
    pub score: f64,
    pub mask: BinaryMask,
    pub bbox: BBox,
}

impl SegmentMask {
    /// Builds an instance whose box is the tight box of `mask`.
    pub fn new(instance_id: u32, label: impl Into<String>, score: f64, mask: BinaryMask) -> Self {
        let bbox = mask.tight_bbox();
        Self { instance_id, label: label.into(), score, mask, bbox }
    }

    pub fn pixel_count(&self) -> usize {
        self.mask.count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tight_box_uses_pixel_edges() {
        let mut m = BinaryMask::empty(10, 8);
        assert_eq!(m.tight_bbox(), BBox::EMPTY);
        m.set(3, 4, true);
        assert_eq!(m.tight_bbox(), BBox::new(3.0, 4.0, 4.0, 5.0));
        m.set(6, 2, true);
        let b = m.tight_bbox();
        assert_eq!(b, BBox::new(3.0, 2.0, 7.0, 5.0));
        assert_eq!(b.area(), 12.0);
    }

    #[test]
    fn bbox_serializes_as_array() {
        let b = BBox::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(serde_json::to_string(&b).unwrap(), "[1.0,2.0,3.0,4.0]");
        let back: BBox = serde_json::from_str("[1,2,3,4]").unwrap();
        assert_eq!(back, b);
    }
}
