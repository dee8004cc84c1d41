use crate::error::{Error, Result};
use crate::image::ImageBuffer;

/// Per-pixel census descriptors of a gray image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusImage {
    width: usize,
    height: usize,
    window: usize,
    codes: Vec<u64>,
}

impl CensusImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Number of bits in each code (window area minus the center).
    pub fn bits(&self) -> u32 {
        (self.window * self.window - 1) as u32
    }

    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> u64 {
        self.codes[v * self.width + u]
    }
}

/// Largest window whose code fits in 64 bits.
pub const MAX_CENSUS_WINDOW: usize = 7;

pub(crate) fn check_window(window: usize) -> Result<()> {
    if window.is_multiple_of(2) || !(3..=MAX_CENSUS_WINDOW).contains(&window) {
        return Err(Error::Param(format!(
            "census window must be odd and within 3..={MAX_CENSUS_WINDOW}, got {window}"
        )));
    }
    Ok(())
}

/// Census transform: one bit per neighbor in the `window x window` square
/// (center excluded, raster order), set iff the neighbor is strictly darker
/// than the center. Borders replicate edge pixels.
pub fn census_transform(img: &ImageBuffer, window: usize) -> Result<CensusImage> {
    img.require_gray("census_transform")?;
    check_window(window)?;
    let (w, h) = img.dims();
    let r = (window / 2) as isize;
    let px = img.samples();
    let at = |u: isize, v: isize| {
        let u = u.clamp(0, w as isize - 1) as usize;
        let v = v.clamp(0, h as isize - 1) as usize;
        px[v * w + u]
    };
    let mut codes = Vec::with_capacity(w * h);
    for v in 0..h as isize {
        for u in 0..w as isize {
            let center = at(u, v);
            let mut code = 0u64;
            for dv in -r..=r {
                for du in -r..=r {
                    if du == 0 && dv == 0 {
                        continue;
                    }
                    code = (code << 1) | (at(u + du, v + dv) < center) as u64;
                }
            }
            codes.push(code);
        }
    }
    Ok(CensusImage { width: w, height: h, window, codes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_has_zero_codes() {
        let img = ImageBuffer::filled(6, 5, 42).unwrap();
        let c = census_transform(&img, 5).unwrap();
        assert!(c.codes().iter().all(|&x| x == 0));
        assert_eq!(c.bits(), 24);
    }

    #[test]
    fn brighter_neighbors_set_no_bits() {
        let img = ImageBuffer::from_fn(5, 5, |u, v| if (u, v) == (2, 2) { 10 } else { 20 }).unwrap();
        let c = census_transform(&img, 5).unwrap();
        assert_eq!(c.get(2, 2), 0);
    }

    #[test]
    fn single_darker_neighbor_sets_one_bit() {
        let img = ImageBuffer::from_fn(5, 5, |u, v| match (u, v) {
            (2, 2) => 10,
            (0, 1) => 5,
            _ => 20,
        })
        .unwrap();
        let c = census_transform(&img, 5).unwrap();
        assert_eq!(c.get(2, 2).count_ones(), 1);
        // (0, 1) is the 6th neighbor in raster order: bit 23 - 5.
        assert_eq!(c.get(2, 2), 1 << 18);
    }

    #[test]
    fn window_validation() {
        let img = ImageBuffer::filled(4, 4, 0).unwrap();
        assert!(matches!(census_transform(&img, 4), Err(Error::Param(_))));
        assert!(matches!(census_transform(&img, 9), Err(Error::Param(_))));
        assert!(census_transform(&img, 3).is_ok());
        let rgb = ImageBuffer::new(1, 1, 3, vec![0; 3]).unwrap();
        assert!(matches!(census_transform(&rgb, 5), Err(Error::Format(_))));
    }
}
