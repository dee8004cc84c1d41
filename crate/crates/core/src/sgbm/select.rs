use rayon::prelude::*;

use super::cost::CostVolume;
use super::SgbmParams;
use crate::error::{Error, Result};
use crate::maps::DisparityMap;

/// Vertex offset of the parabola through `(-1, prev)`, `(0, best)`, `(1, next)`.
/// `None` when the curvature is not positive.
#[inline]
pub fn parabola_offset(prev: f64, best: f64, next: f64) -> Option<f64> {
    let denom = prev - 2.0 * best + next;
    (denom > 0.0).then(|| (prev - next) / (2.0 * denom))
}

/// Winner-take-all over one cost curve. Returns the disparity index and
/// subpixel offset, or `None` when the uniqueness test rejects the pixel.
///
/// The smallest index wins ties. A pixel is ambiguous when any index more
/// than one step from the winner either ties it or costs less than
/// `best * (1 + uniqueness / 100)`.
pub fn select_curve(curve: &[u16], uniqueness_ratio: u32) -> Option<(usize, f64)> {
    let (best_d, best) = curve
        .iter()
        .enumerate()
        .fold((0, u16::MAX), |acc, (d, &s)| if s < acc.1 { (d, s) } else { acc });
    let threshold = best as u64 * (100 + uniqueness_ratio as u64);
    let ambiguous = curve.iter().enumerate().any(|(d, &s)| {
        d.abs_diff(best_d) > 1 && (s == best || (s as u64) * 100 < threshold)
    });
    if ambiguous {
        return None;
    }
    let offset = if best_d > 0 && best_d + 1 < curve.len() {
        parabola_offset(curve[best_d - 1] as f64, best as f64, curve[best_d + 1] as f64).unwrap_or(0.0)
    } else {
        0.0
    };
    Some((best_d, offset))
}

/// Per-pixel winner-take-all with uniqueness rejection and parabolic subpixel refinement.
pub fn select_disparity(aggregated: &CostVolume, params: &SgbmParams) -> DisparityMap {
    let (w, h, nd) = (aggregated.width(), aggregated.height(), aggregated.num_disparities());
    let mut values = vec![DisparityMap::INVALID; w * h];
    values
        .par_chunks_mut(w)
        .zip(aggregated.costs().par_chunks(w * nd))
        .for_each(|(row, costs)| {
            for (out, curve) in row.iter_mut().zip(costs.chunks_exact(nd)) {
                if let Some((d, offset)) = select_curve(curve, params.uniqueness_ratio) {
                    *out = ((params.min_disparity + d) as f64 + offset) as f32;
                }
            }
        });
    DisparityMap::new(w, h, values).expect("dimensions come from the volume")
}

/// Left/right consistency: keeps `d_L(u, v)` iff
/// `|d_L(u, v) - d_R(u - round(d_L), v)| <= max_diff`.
pub fn lr_consistency_filter(
    left: &DisparityMap,
    right: &DisparityMap,
    max_diff: f32,
) -> Result<DisparityMap> {
    let mask = lr_consistent_mask(left, right, max_diff)?;
    let values = left
        .values()
        .iter()
        .zip(&mask)
        .map(|(&d, &ok)| if ok { d } else { DisparityMap::INVALID })
        .collect();
    DisparityMap::new(left.width(), left.height(), values)
}

/// `true` where the left disparity passes the left/right check.
pub(crate) fn lr_consistent_mask(
    left: &DisparityMap,
    right: &DisparityMap,
    max_diff: f32,
) -> Result<Vec<bool>> {
    if left.dims() != right.dims() {
        return Err(Error::Shape(format!(
            "left disparity {:?} vs right {:?}",
            left.dims(),
            right.dims()
        )));
    }
    let w = left.width();
    let mut mask = vec![false; left.values().len()];
    for v in 0..left.height() {
        for u in 0..w {
            let d = left.get(u, v);
            if !DisparityMap::is_valid_value(d) {
                continue;
            }
            let x = u as i64 - d.round() as i64;
            if x < 0 || x >= w as i64 {
                continue;
            }
            let dr = right.get(x as usize, v);
            mask[v * w + u] = DisparityMap::is_valid_value(dr) && (d - dr).abs() <= max_diff;
        }
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_parabola_has_zero_offset() {
        // S = (9, 2, 9) over d = 3, 4, 5 with min_disparity 3.
        let vol = CostVolume::new(1, 1, 3, vec![9, 2, 9]).unwrap();
        let params = SgbmParams { min_disparity: 3, uniqueness_ratio: 10, ..Default::default() };
        let d = select_disparity(&vol, &params);
        assert_eq!(d.get(0, 0), 4.0);
    }

    #[test]
    fn uniqueness_rejects_close_competitor() {
        let mut curve = vec![400u16; 16];
        curve[3] = 100;
        curve[8] = 105;
        assert_eq!(select_curve(&curve, 10), None);
        curve[8] = 110;
        assert!(select_curve(&curve, 10).is_some());
        // Adjacent indices are not competitors.
        curve[8] = 400;
        curve[4] = 101;
        assert!(select_curve(&curve, 10).is_some());
    }

    #[test]
    fn flat_curve_is_ambiguous() {
        assert_eq!(select_curve(&[0; 8], 10), None);
        assert_eq!(select_curve(&[7; 8], 0), None);
    }

    #[test]
    fn ties_pick_smallest_disparity() {
        let (d, _) = select_curve(&[50, 3, 3, 50, 50, 50], 0).unwrap();
        assert_eq!(d, 1);
    }

    #[test]
    fn subpixel_offset_matches_dense_parabola_fit() {
        // Closed form: (6 - 4) / (2 * (6 - 2*2 + 4)) = 2 / 12.
        let off = parabola_offset(6.0, 2.0, 4.0).unwrap();
        assert!((off - 1.0 / 6.0).abs() < 1e-12);
        // Independent check: fit a*x^2 + b*x + c through the three samples and
        // locate the minimum of the fitted curve on a fine grid.
        let (a, b) = ((6.0 + 4.0 - 2.0 * 2.0) / 2.0, (4.0 - 6.0) / 2.0);
        let f = |x: f64| a * x * x + b * x + 2.0;
        let grid_min = (-50_000..=50_000)
            .map(|i| i as f64 * 1e-5)
            .min_by(|x, y| f(*x).partial_cmp(&f(*y)).unwrap())
            .unwrap();
        assert!((off - grid_min).abs() < 1e-5);
        assert_eq!(parabola_offset(1.0, 1.0, 1.0), None);
    }

    #[test]
    fn output_stays_within_half_pixel_of_range() {
        let params = SgbmParams { min_disparity: 2, uniqueness_ratio: 0, ..Default::default() };
        let vol = CostVolume::new(2, 1, 3, vec![5, 1, 0, 0, 1, 9]).unwrap();
        let d = select_disparity(&vol, &params);
        for &x in d.values() {
            assert!((1.5..=4.5).contains(&x), "{x}");
        }
    }

    #[test]
    fn lr_examples() {
        let l = DisparityMap::filled(30, 2, 10.0);
        let r = DisparityMap::filled(30, 2, 10.0);
        let out = lr_consistency_filter(&l, &r, 1.0).unwrap();
        for u in 10..30 {
            assert_eq!(out.get(u, 0), 10.0);
        }
        // Lookups left of the image are rejected.
        for u in 0..10 {
            assert!(!out.is_valid(u, 1));
        }

        let r20 = DisparityMap::filled(30, 2, 20.0);
        let out = lr_consistency_filter(&l, &r20, 1.0).unwrap();
        assert_eq!(out.valid_count(), 0);

        let bad = DisparityMap::filled(29, 2, 10.0);
        assert!(matches!(lr_consistency_filter(&l, &bad, 1.0), Err(Error::Shape(_))));
    }
}
