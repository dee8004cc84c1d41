//! Synthetic rectified stereo scenes with exact ground truth.
//!
//! A scene is a textured fronto-parallel background plane and a set of
//! fronto-parallel "branches": capsules (segments with a radius) at constant
//! depth, each with its own texture. Every surface's texture lives in left
//! image coordinates, so the right view samples surface `s` at `x + d_s` and
//! the nearest covering surface wins. Background texture extends past the
//! right image edge so dis-occluded pixels receive fresh texture.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::calib::CameraCalibration;
use crate::error::{Error, Result};
use crate::image::{ImageBuffer, StereoFrame};
use crate::maps::{DepthMap, DisparityMap};
use crate::mask::{BinaryMask, SegmentMask};
use crate::preprocess::{convolve_separable, gaussian_kernel};

/// Intensity band of background texture.
pub const BACKGROUND_BAND: (f64, f64) = (120.0, 255.0);
/// Intensity band of branch texture; disjoint from the background band.
pub const BRANCH_BAND: (f64, f64) = (0.0, 100.0);
const TEXTURE_SIGMA: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    /// Capsule center `(u, v)`, pixels.
    pub center: [f64; 2],
    pub radius: f64,
    /// Axis orientation, degrees counter-clockwise from the image x axis.
    pub angle: f64,
    /// Distance between the two end-cap centers, pixels.
    pub length: f64,
    /// Meters.
    pub depth: f64,
}

impl BranchSpec {
    fn endpoints(&self) -> ([f64; 2], [f64; 2]) {
        let (s, c) = self.angle.to_radians().sin_cos();
        let h = self.length / 2.0;
        let [cu, cv] = self.center;
        ([cu - h * c, cv + h * s], [cu + h * c, cv - h * s])
    }

    /// Whether the point `(u, v)` lies inside the capsule.
    pub fn contains(&self, u: f64, v: f64) -> bool {
        let (a, b) = self.endpoints();
        let (ab_u, ab_v) = (b[0] - a[0], b[1] - a[1]);
        let len2 = ab_u * ab_u + ab_v * ab_v;
        let t = if len2 > 0.0 {
            (((u - a[0]) * ab_u + (v - a[1]) * ab_v) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (du, dv) = (u - (a[0] + t * ab_u), v - (a[1] + t * ab_v));
        du * du + dv * dv <= self.radius * self.radius
    }

    /// Axis-aligned extent `(u_min, v_min, u_max, v_max)`.
    pub fn extent(&self) -> (f64, f64, f64, f64) {
        let (a, b) = self.endpoints();
        (
            a[0].min(b[0]) - self.radius,
            a[1].min(b[1]) - self.radius,
            a[0].max(b[0]) + self.radius,
            a[1].max(b[1]) + self.radius,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub calib: CameraCalibration,
    pub background_depth: f64,
    pub branches: Vec<BranchSpec>,
    pub texture_seed: u64,
    /// Standard deviation of additive per-view intensity noise.
    pub noise_sigma: f64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        self.calib.validate()?;
        let (w, h) = (self.calib.width as f64, self.calib.height as f64);
        if !(self.background_depth > self.calib.baseline && self.background_depth.is_finite()) {
            return Err(Error::Spec(format!(
                "background depth {} must exceed the baseline {}",
                self.background_depth, self.calib.baseline
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Spec(format!("noise_sigma {} must be >= 0", self.noise_sigma)));
        }
        for (i, b) in self.branches.iter().enumerate() {
            if !(b.depth > self.calib.baseline && b.depth < self.background_depth) {
                return Err(Error::Spec(format!(
                    "branch {i}: depth {} must lie in ({}, {})",
                    b.depth, self.calib.baseline, self.background_depth
                )));
            }
            if b.radius.is_nan() || b.radius <= 0.0 || b.length.is_nan() || b.length < 0.0 || !b.angle.is_finite() {
                return Err(Error::Spec(format!("branch {i}: malformed geometry")));
            }
            let (u0, v0, u1, v1) = b.extent();
            if u0 < 0.0 || v0 < 0.0 || u1 > w - 1.0 || v1 > h - 1.0 {
                return Err(Error::Spec(format!(
                    "branch {i} extends outside the {}x{} image",
                    self.calib.width, self.calib.height
                )));
            }
        }
        Ok(())
    }

    pub fn disparity_of(&self, depth: f64) -> f64 {
        self.calib.focal_baseline() / depth
    }
}

/// Output of [`render_scene`].
#[derive(Debug, Clone)]
pub struct RenderedScene {
    pub frame: StereoFrame,
    pub gt_disparity: DisparityMap,
    pub gt_depth: DepthMap,
    /// Visible pixels of each branch in the left view, ids `1..=n` in spec order.
    pub masks: Vec<SegmentMask>,
    /// Ground-truth depth of each branch, meters.
    pub branch_depths: Vec<f64>,
    /// Left pixels whose surface point is not visible in the right view.
    pub occlusion: BinaryMask,
    /// Right pixels showing surface points hidden from (or outside) the left view.
    pub disoccluded_right: BinaryMask,
}

/// Smoothed uniform noise rescaled to fill `band`.
fn texture(width: usize, height: usize, band: (f64, f64), rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..width * height).map(|_| rng.random::<f64>()).collect();
    let smooth = convolve_separable(&raw, width, height, &gaussian_kernel(1, TEXTURE_SIGMA));
    let (lo, hi) = smooth
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let span = (hi - lo).max(f64::EPSILON);
    smooth.iter().map(|x| band.0 + (x - lo) / span * (band.1 - band.0)).collect()
}

/// Linear interpolation along a row of `raster`, clamped at the ends.
fn sample_row(raster: &[f64], width: usize, u: f64, v: usize) -> f64 {
    let u = u.clamp(0.0, (width - 1) as f64);
    let u0 = u.floor() as usize;
    let u1 = (u0 + 1).min(width - 1);
    let t = u - u0 as f64;
    let row = &raster[v * width..(v + 1) * width];
    row[u0] * (1.0 - t) + row[u1] * t
}

/// Surfaces in front-to-back order: branch indices sorted by depth, then the background.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Surface {
    Branch(usize),
    Background,
}

pub fn render_scene(spec: &SceneSpec) -> Result<RenderedScene> {
    spec.validate()?;
    let (w, h) = (spec.calib.width, spec.calib.height);
    let mut order: Vec<usize> = (0..spec.branches.len()).collect();
    order.sort_by(|&a, &b| spec.branches[a].depth.total_cmp(&spec.branches[b].depth).then(a.cmp(&b)));
    let disp_bg = spec.disparity_of(spec.background_depth);
    let branch_disp: Vec<f64> = spec.branches.iter().map(|b| spec.disparity_of(b.depth)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.texture_seed);
    let bg_width = w + disp_bg.ceil() as usize + 2;
    let bg_tex = texture(bg_width, h, BACKGROUND_BAND, &mut rng);
    let branch_tex: Vec<Vec<f64>> =
        spec.branches.iter().map(|_| texture(w, h, BRANCH_BAND, &mut rng)).collect();

    // Nearest surface covering continuous left-image point (u, v).
    let left_surface = |u: f64, v: usize| -> Surface {
        order
            .iter()
            .find(|&&i| spec.branches[i].contains(u, v as f64))
            .map_or(Surface::Background, |&i| Surface::Branch(i))
    };
    // Nearest surface seen by the right camera at pixel (x, v), with its left coordinate.
    let right_surface = |x: f64, v: usize| -> (Surface, f64) {
        for &i in &order {
            let u = x + branch_disp[i];
            if spec.branches[i].contains(u, v as f64) {
                return (Surface::Branch(i), u);
            }
        }
        (Surface::Background, x + disp_bg)
    };
    let disparity = |s: Surface| match s {
        Surface::Branch(i) => branch_disp[i],
        Surface::Background => disp_bg,
    };

    let mut left = vec![0.0; w * h];
    let mut right = vec![0.0; w * h];
    let mut gt_disp = vec![0.0f32; w * h];
    let mut gt_depth = vec![0.0f32; w * h];
    let mut masks: Vec<BinaryMask> = spec.branches.iter().map(|_| BinaryMask::empty(w, h)).collect();
    let mut occlusion = BinaryMask::empty(w, h);
    let mut disoccluded = BinaryMask::empty(w, h);

    for v in 0..h {
        for u in 0..w {
            let p = v * w + u;
            let s = left_surface(u as f64, v);
            let (value, depth) = match s {
                Surface::Branch(i) => {
                    masks[i].set(u, v, true);
                    (branch_tex[i][p], spec.branches[i].depth)
                }
                Surface::Background => (bg_tex[v * bg_width + u], spec.background_depth),
            };
            left[p] = value;
            gt_disp[p] = disparity(s) as f32;
            gt_depth[p] = depth as f32;
            let x = u as f64 - disparity(s);
            if x < -0.5 || right_surface(x, v).0 != s {
                occlusion.set(u, v, true);
            }
        }
        for x in 0..w {
            let (s, u) = right_surface(x as f64, v);
            right[v * w + x] = match s {
                Surface::Branch(i) => sample_row(&branch_tex[i], w, u, v),
                Surface::Background => sample_row(&bg_tex, bg_width, u, v),
            };
            if u > w as f64 - 0.5 || left_surface(u.round(), v) != s {
                disoccluded.set(x, v, true);
            }
        }
    }

    let quantize = |values: &[f64], rng: &mut ChaCha8Rng| -> Vec<u8> {
        let noise = (spec.noise_sigma > 0.0).then(|| Normal::new(0.0, spec.noise_sigma).expect("sigma checked"));
        values
            .iter()
            .map(|&x| {
                let n = noise.as_ref().map_or(0.0, |d| d.sample(rng));
                (x + n).round().clamp(0.0, 255.0) as u8
            })
            .collect()
    };
    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.texture_seed ^ 0x9e37_79b9_7f4a_7c15);
    let left = ImageBuffer::gray(w, h, quantize(&left, &mut noise_rng))?;
    let right = ImageBuffer::gray(w, h, quantize(&right, &mut noise_rng))?;

    Ok(RenderedScene {
        frame: StereoFrame::new(left, right, spec.calib)?,
        gt_disparity: DisparityMap::new(w, h, gt_disp)?,
        gt_depth: DepthMap::new(w, h, gt_depth)?,
        masks: masks
            .into_iter()
            .enumerate()
            .map(|(i, m)| SegmentMask::new(i as u32 + 1, "branch", 1.0, m))
            .collect(),
        branch_depths: spec.branches.iter().map(|b| b.depth).collect(),
        occlusion,
        disoccluded_right: disoccluded,
    })
}

/// First texture seed of [`range_protocol`]; scene `i` uses `RANGE_SEED + i`.
pub const RANGE_SEED: u64 = 0x5eed;

/// One scene per requested depth, each with a single centered branch.
pub fn range_protocol(calib: &CameraCalibration, depths: &[f64]) -> Result<Vec<SceneSpec>> {
    if depths.is_empty() {
        return Err(Error::Spec("range protocol needs at least one depth".into()));
    }
    let farthest = depths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let background_depth = (2.0 * farthest).max(4.0);
    let (w, h) = (calib.width as f64, calib.height as f64);
    depths
        .iter()
        .enumerate()
        .map(|(i, &depth)| {
            let spec = SceneSpec {
                calib: *calib,
                background_depth,
                branches: vec![BranchSpec {
                    center: [w / 2.0, h / 2.0],
                    radius: (h / 12.0).max(3.0),
                    angle: 20.0,
                    length: w / 3.0,
                    depth,
                }],
                texture_seed: RANGE_SEED + i as u64,
                noise_sigma: 2.0,
            };
            spec.validate()?;
            Ok(spec)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calib() -> CameraCalibration {
        CameraCalibration::centered(700.0, 0.12, 240, 120).unwrap()
    }

    fn scene(noise: f64) -> SceneSpec {
        SceneSpec {
            calib: calib(),
            background_depth: 5.0,
            branches: vec![BranchSpec { center: [150.0, 60.0], radius: 10.0, angle: 15.0, length: 80.0, depth: 1.0 }],
            texture_seed: 11,
            noise_sigma: noise,
        }
    }

    #[test]
    fn ground_truth_follows_triangulation() {
        let r = render_scene(&scene(0.0)).unwrap();
        let m = &r.masks[0];
        assert!(m.pixel_count() > 500);
        for (u, v) in m.mask.pixels() {
            assert!((r.gt_disparity.get(u, v) - 84.0).abs() < 1e-5);
            assert_eq!(r.gt_depth.get(u, v), 1.0);
        }
        assert!((r.gt_disparity.get(0, 0) - 16.8).abs() < 1e-5);
        for (d, z) in r.gt_disparity.values().iter().zip(r.gt_depth.values()) {
            assert!(((*d as f64) * (*z as f64) - 84.0).abs() < 1e-4);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = render_scene(&scene(0.0)).unwrap();
        let b = render_scene(&scene(0.0)).unwrap();
        assert_eq!(a.frame.left, b.frame.left);
        assert_eq!(a.frame.right, b.frame.right);
        let mut other = scene(0.0);
        other.texture_seed = 12;
        assert_ne!(render_scene(&other).unwrap().frame.left, a.frame.left);
        let noisy = render_scene(&scene(2.0)).unwrap();
        assert_eq!(noisy.frame.left, render_scene(&scene(2.0)).unwrap().frame.left);
    }

    #[test]
    fn integer_disparity_right_view_is_exact_shift() {
        // 0.12 * 700 / 2.625 = 32 px everywhere.
        let spec = SceneSpec { background_depth: 2.625, branches: vec![], ..scene(0.0) };
        let r = render_scene(&spec).unwrap();
        let (l, rt) = (&r.frame.left, &r.frame.right);
        for v in 0..120 {
            for x in 0..240 - 32 {
                assert_eq!(rt.get(x, v), l.get(x + 32, v));
            }
            for u in 0..32 {
                assert!(r.occlusion.get(u, v));
            }
            for x in 240 - 32..240 {
                assert!(r.disoccluded_right.get(x, v));
            }
        }
        assert_eq!(r.occlusion.count(), 32 * 120);
    }

    #[test]
    fn branch_occludes_background() {
        let spec = SceneSpec {
            background_depth: 84.0 / 20.0,
            branches: vec![BranchSpec { center: [150.0, 60.0], radius: 10.0, angle: 90.0, length: 40.0, depth: 84.0 / 60.0 }],
            ..scene(0.0)
        };
        let r = render_scene(&spec).unwrap();
        // The right camera sees the branch at x in [80, 100], hiding the background
        // left pixels u = x + 20 in [100, 120].
        let v = 60;
        let occluded: Vec<usize> = (20..240).filter(|&u| r.occlusion.get(u, v)).collect();
        assert_eq!(occluded, (100..=120).collect::<Vec<_>>());
        // Branch pixels visible in both views are never occluded.
        for (u, v) in r.masks[0].mask.pixels() {
            assert!(!r.occlusion.get(u, v));
        }
        // Disjoint texture bands.
        for (u, v) in r.masks[0].mask.pixels() {
            assert!(r.frame.left.get(u, v) <= BRANCH_BAND.1 as u8);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = scene(0.0);
        s.branches[0].center = [230.0, 60.0];
        assert!(matches!(render_scene(&s), Err(Error::Spec(_))));
        let mut s = scene(0.0);
        s.branches[0].depth = 6.0;
        assert!(matches!(render_scene(&s), Err(Error::Spec(_))));
        let mut s = scene(0.0);
        s.branches[0].depth = 0.1;
        assert!(matches!(render_scene(&s), Err(Error::Spec(_))));
    }

    #[test]
    fn range_protocol_scenes() {
        let c = CameraCalibration::centered(700.0, 0.12, 640, 480).unwrap();
        let scenes = range_protocol(&c, &[1.0, 1.5, 2.0]).unwrap();
        assert_eq!(scenes.len(), 3);
        assert_eq!(scenes.iter().map(|s| s.branches[0].depth).collect::<Vec<_>>(), vec![1.0, 1.5, 2.0]);
        assert_eq!(range_protocol(&c, &[1.0]).unwrap().len(), 1);
        assert!(range_protocol(&c, &[]).is_err());
    }
}
