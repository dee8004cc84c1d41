//! Block-summed census matching costs.
//!
//! The per-pixel cost of matching `left(u, v)` with `right(u - d, v)` is the
//! Hamming distance of their census codes. The volume stores the sum of
//! those per-pixel costs over a `block_size x block_size` window centered on
//! the pixel (window positions clamped to the image), which puts the costs
//! on the scale of a block-matching SAD.

use rayon::prelude::*;

use super::census::CensusImage;
use super::SgbmParams;
use crate::error::{Error, Result};

/// Matching costs indexed by `(v, u, disparity index)`, disparity fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostVolume {
    width: usize,
    height: usize,
    num_disparities: usize,
    costs: Vec<u16>,
}

impl CostVolume {
    pub fn new(width: usize, height: usize, num_disparities: usize, costs: Vec<u16>) -> Result<Self> {
        if costs.len() != width * height * num_disparities {
            return Err(Error::Shape(format!(
                "{} costs for {width}x{height}x{num_disparities}",
                costs.len()
            )));
        }
        Ok(Self { width, height, num_disparities, costs })
    }

    pub fn zeros(width: usize, height: usize, num_disparities: usize) -> Self {
        Self { width, height, num_disparities, costs: vec![0; width * height * num_disparities] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_disparities(&self) -> usize {
        self.num_disparities
    }

    pub fn costs(&self) -> &[u16] {
        &self.costs
    }

    pub fn costs_mut(&mut self) -> &mut [u16] {
        &mut self.costs
    }

    pub fn into_costs(self) -> Vec<u16> {
        self.costs
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize, d: usize) -> u16 {
        self.costs[(v * self.width + u) * self.num_disparities + d]
    }

    /// Cost curve of pixel `(u, v)` over all disparity indices.
    #[inline]
    pub fn curve(&self, u: usize, v: usize) -> &[u16] {
        let i = (v * self.width + u) * self.num_disparities;
        &self.costs[i..i + self.num_disparities]
    }
}

/// Per-pixel cost of a correspondence outside the other view: one more than
/// the largest Hamming distance.
pub fn pixel_out_of_range_cost(census: &CensusImage) -> u16 {
    census.bits() as u16 + 1
}

/// Cost stored where the center correspondence falls outside the other view.
pub fn out_of_range_cost(census: &CensusImage, block_size: usize) -> u16 {
    (block_size * block_size) as u16 * pixel_out_of_range_cost(census)
}

/// Which view supplies the reference pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reference {
    /// `cost(u, v, d) = H(left(u, v), right(u - d, v))`
    Left,
    /// `cost(u, v, d) = H(right(u, v), left(u + d, v))`
    Right,
}

fn build(
    left: &CensusImage,
    right: &CensusImage,
    params: &SgbmParams,
    reference: Reference,
) -> Result<CostVolume> {
    if left.dims() != right.dims() || left.window() != right.window() {
        return Err(Error::Shape(format!(
            "census rasters differ: {:?}/{} vs {:?}/{}",
            left.dims(),
            left.window(),
            right.dims(),
            right.window()
        )));
    }
    if params.block_size.is_multiple_of(2) {
        return Err(Error::Param(format!("block_size must be odd, got {}", params.block_size)));
    }
    let (w, h) = left.dims();
    let nd = params.num_disparities;
    let min_d = params.min_disparity;
    let r = params.block_size / 2;
    let pixel_large = pixel_out_of_range_cost(left) as u8;
    let large = out_of_range_cost(left, params.block_size);
    let (reference_img, other_img) = match reference {
        Reference::Left => (left, right),
        Reference::Right => (right, left),
    };
    let target = |u: usize, d: usize| match reference {
        Reference::Left => u.checked_sub(d),
        Reference::Right => Some(u + d).filter(|&x| x < w),
    };

    // Per-pixel Hamming costs, then a horizontal box sum with clamped positions.
    let mut horizontal = vec![0u16; w * h * nd];
    horizontal.par_chunks_mut(w * nd).enumerate().for_each(|(v, out_row)| {
        let ref_row = &reference_img.codes()[v * w..(v + 1) * w];
        let other_row = &other_img.codes()[v * w..(v + 1) * w];
        let mut pixel = vec![0u8; w * nd];
        for (u, curve) in pixel.chunks_exact_mut(nd).enumerate() {
            let code = ref_row[u];
            for (k, c) in curve.iter_mut().enumerate() {
                *c = match target(u, min_d + k) {
                    Some(x) => (code ^ other_row[x]).count_ones() as u8,
                    None => pixel_large,
                };
            }
        }
        for (u, out) in out_row.chunks_exact_mut(nd).enumerate() {
            for du in 0..=2 * r {
                let x = (u + du).saturating_sub(r).min(w - 1);
                for (o, &p) in out.iter_mut().zip(&pixel[x * nd..(x + 1) * nd]) {
                    *o += p as u16;
                }
            }
        }
    });

    // Vertical box sum.
    let mut costs = vec![0u16; w * h * nd];
    costs.par_chunks_mut(w * nd).enumerate().for_each(|(v, out_row)| {
        for dv in 0..=2 * r {
            let y = (v + dv).saturating_sub(r).min(h - 1);
            for (o, &s) in out_row.iter_mut().zip(&horizontal[y * w * nd..(y + 1) * w * nd]) {
                *o += s;
            }
        }
        for (u, curve) in out_row.chunks_exact_mut(nd).enumerate() {
            for (k, c) in curve.iter_mut().enumerate() {
                if target(u, min_d + k).is_none() {
                    *c = large;
                }
            }
        }
    });
    CostVolume::new(w, h, nd, costs)
}

/// Left-reference cost volume. Correspondences with `u - d < 0` cost
/// [`out_of_range_cost`].
pub fn compute_cost_volume(
    left: &CensusImage,
    right: &CensusImage,
    params: &SgbmParams,
) -> Result<CostVolume> {
    build(left, right, params, Reference::Left)
}

/// Right-reference cost volume, matching `right(u, v)` against `left(u + d, v)`.
pub fn compute_right_cost_volume(
    left: &CensusImage,
    right: &CensusImage,
    params: &SgbmParams,
) -> Result<CostVolume> {
    build(left, right, params, Reference::Right)
}

#[cfg(test)]
mod tests {
    use super::super::census::census_transform;
    use super::*;
    use crate::image::ImageBuffer;

    fn texture(w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, |u, v| ((u * 7919 + v * 104729 + u * v * 31) % 251) as u8).unwrap()
    }

    fn params(nd: usize, block_size: usize) -> SgbmParams {
        SgbmParams { num_disparities: nd, block_size, ..Default::default() }
    }

    #[test]
    fn identical_views_zero_at_d0() {
        let c = census_transform(&texture(20, 8), 5).unwrap();
        let vol = compute_cost_volume(&c, &c, &params(16, 5)).unwrap();
        for v in 0..8 {
            for u in 0..20 {
                assert_eq!(vol.get(u, v, 0), 0);
            }
        }
    }

    #[test]
    fn shifted_views_zero_at_shift() {
        let left = texture(40, 10);
        let right = ImageBuffer::from_fn(40, 10, |u, v| left.get((u + 4).min(39), v)).unwrap();
        let (cl, cr) = (census_transform(&left, 5).unwrap(), census_transform(&right, 5).unwrap());
        let vol = compute_cost_volume(&cl, &cr, &params(16, 5)).unwrap();
        // Interior: census and block support clear of the borders and of the
        // replicated right edge.
        for v in 0..10 {
            for u in 8..32 {
                assert_eq!(vol.get(u, v, 4), 0, "({u}, {v})");
            }
        }
        let rvol = compute_right_cost_volume(&cl, &cr, &params(16, 5)).unwrap();
        for v in 0..10 {
            for u in 4..28 {
                assert_eq!(rvol.get(u, v, 4), 0, "({u}, {v})");
            }
        }
    }

    #[test]
    fn block_sum_of_pixel_costs() {
        // Brute-force the block sum from per-pixel Hamming distances.
        let left = census_transform(&texture(24, 9), 3).unwrap();
        let other = ImageBuffer::from_fn(24, 9, |u, v| ((u * 37 + v * 11) % 13 * 19) as u8).unwrap();
        let right = census_transform(&other, 3).unwrap();
        let p = params(16, 3);
        let vol = compute_cost_volume(&left, &right, &p).unwrap();
        let clamp = |x: isize, n: usize| x.clamp(0, n as isize - 1) as usize;
        for v in 0..9 {
            for u in 0..24 {
                for d in 0..16 {
                    let expected: u32 = if u < d {
                        9 * 9
                    } else {
                        let mut s = 0;
                        for dv in -1..=1isize {
                            for du in -1..=1isize {
                                let (x, y) = (clamp(u as isize + du, 24), clamp(v as isize + dv, 9));
                                s += if x >= d {
                                    (left.get(x, y) ^ right.get(x - d, y)).count_ones()
                                } else {
                                    9
                                };
                            }
                        }
                        s
                    };
                    assert_eq!(vol.get(u, v, d) as u32, expected, "({u}, {v}, {d})");
                }
            }
        }
    }

    #[test]
    fn out_of_range_is_large() {
        let c = census_transform(&texture(20, 4), 5).unwrap();
        let vol = compute_cost_volume(&c, &c, &params(16, 5)).unwrap();
        assert_eq!(out_of_range_cost(&c, 5), 625);
        assert_eq!(vol.get(3, 1, 4), 625);
        assert_eq!(vol.get(0, 0, 15), 625);
        assert!(vol.get(4, 1, 4) < 625);
        let rvol = compute_right_cost_volume(&c, &c, &params(16, 5)).unwrap();
        assert_eq!(rvol.get(19, 1, 1), 625);
        assert!(rvol.get(18, 1, 1) < 625);
    }

    #[test]
    fn shape_mismatch() {
        let a = census_transform(&texture(20, 4), 5).unwrap();
        let b = census_transform(&texture(21, 4), 5).unwrap();
        assert!(matches!(compute_cost_volume(&a, &b, &params(16, 5)), Err(Error::Shape(_))));
    }
}
