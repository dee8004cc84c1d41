//! Scenario builders shared by the integration and acceptance tests.

#![allow(dead_code)]

use branchdepth::fusion::localize_branches;
use branchdepth::metrics::EvalPair;
use branchdepth::preprocess::to_grayscale;
use branchdepth::synthgen::{render_scene, BranchSpec, RenderedScene, SceneSpec};
use branchdepth::wls::{wls_refine, WlsParams};
use branchdepth::{BinaryMask, CameraCalibration, DepthMap, DisparityMap, ImageBuffer, SegmentMask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// 320x240 scene with three branches at 1.0, 1.5 and 2.0 m over a 4 m
/// background, each visible in both views.
pub fn three_branch_scene(texture_seed: u64) -> RenderedScene {
    let calib = CameraCalibration::centered(700.0, 0.12, 320, 240).unwrap();
    let branch = |center, radius, angle, length, depth| BranchSpec { center, radius, angle, length, depth };
    render_scene(&SceneSpec {
        calib,
        background_depth: 4.0,
        branches: vec![
            branch([180.0, 70.0], 12.0, 30.0, 140.0, 1.0),
            branch([200.0, 150.0], 11.0, -50.0, 120.0, 1.5),
            branch([160.0, 200.0], 11.0, 5.0, 150.0, 2.0),
        ],
        texture_seed,
        noise_sigma: 2.0,
    })
    .unwrap()
}

/// Pixels within `radius` (Chebyshev) of a ground-truth surface change.
pub fn boundary_band(gt: &DisparityMap, radius: usize) -> Vec<bool> {
    let (w, h) = gt.dims();
    let mut band = vec![false; w * h];
    for v in 0..h {
        for u in 0..w {
            let d = gt.get(u, v);
            let (u0, u1) = (u.saturating_sub(radius), (u + radius).min(w - 1));
            let (v0, v1) = (v.saturating_sub(radius), (v + radius).min(h - 1));
            band[v * w + u] = (v0..=v1).any(|y| (u0..=u1).any(|x| gt.get(x, y) != d));
        }
    }
    band
}

pub struct WlsQuality {
    pub homogeneous_before: f64,
    pub homogeneous_after: f64,
    pub band_before: f64,
    pub band_after: f64,
}

/// Ground-truth disparity plus Gaussian noise (1.5 px), refined with `params`
/// using the left image as guide. MAE is split into the +-2 px boundary band
/// and the remaining homogeneous pixels.
pub fn wls_quality(scene: &RenderedScene, params: &WlsParams, noise_seed: u64) -> WlsQuality {
    let gt = &scene.gt_disparity;
    let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
    let noise = Normal::new(0.0, 1.5).unwrap();
    let noisy: Vec<f32> = gt.values().iter().map(|&d| d + noise.sample(&mut rng) as f32).collect();
    let disp = DisparityMap::new(gt.width(), gt.height(), noisy).unwrap();
    let conf = vec![1.0; disp.values().len()];
    let guide = to_grayscale(&scene.frame.left).unwrap();
    let out = wls_refine(&disp, &guide, &conf, params).unwrap();
    let band = boundary_band(gt, 2);
    let mae = |m: &DisparityMap, in_band: bool| {
        let errs: Vec<f64> = (0..band.len())
            .filter(|&i| band[i] == in_band)
            .map(|i| (m.values()[i] - gt.values()[i]).abs() as f64)
            .collect();
        errs.iter().sum::<f64>() / errs.len() as f64
    };
    WlsQuality {
        homogeneous_before: mae(&disp, false),
        homogeneous_after: mae(&out, false),
        band_before: mae(&disp, true),
        band_after: mae(&out, true),
    }
}

/// Median depth of a 1 m branch before and after replacing 1% of its pixels by 50 m.
pub fn outlier_injection(seed: u64) -> (f64, f64) {
    let (w, h) = (160, 120);
    let calib = CameraCalibration::centered(700.0, 0.12, w, h).unwrap();
    let mask = BinaryMask::from_fn(w, h, |u, v| (30..130).contains(&u) && (40..80).contains(&v));
    let seg = SegmentMask::new(1, "branch", 1.0, mask.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut depth: Vec<f32> = (0..w * h).map(|_| 4.0).collect();
    for (u, v) in mask.pixels() {
        depth[v * w + u] = (1.0 + noise.sample(&mut rng)) as f32;
    }
    let median = |values: &[f32]| {
        let map = DepthMap::new(w, h, values.to_vec()).unwrap();
        localize_branches(std::slice::from_ref(&seg), &map, &calib, 0.25).estimates[0].median_depth
    };
    let clean = median(&depth);
    let pixels: Vec<(usize, usize)> = mask.pixels().collect();
    let n = pixels.len() / 100;
    let mut chosen = 0;
    while chosen < n {
        let (u, v) = pixels[rng.random_range(0..pixels.len())];
        if depth[v * w + u] != 50.0 {
            depth[v * w + u] = 50.0;
            chosen += 1;
        }
    }
    (clean, median(&depth))
}

/// Two-region guide and disparity with noise, about 20% of pixels invalid.
pub fn noisy_two_region(w: usize, h: usize, seed: u64) -> (DisparityMap, Vec<f32>, ImageBuffer) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let split = rng.random_range(w / 4..3 * w / 4);
    let noise = Normal::new(0.0, 1.5).unwrap();
    let guide = ImageBuffer::from_fn(w, h, |u, v| {
        let base = if u + v / 3 < split { 40 } else { 200 };
        base + ((u * 7 + v * 13) % 9) as u8
    })
    .unwrap();
    let mut values = Vec::with_capacity(w * h);
    let mut conf = Vec::with_capacity(w * h);
    for v in 0..h {
        for u in 0..w {
            if rng.random_bool(0.2) {
                values.push(DisparityMap::INVALID);
                conf.push(0.0);
            } else {
                let truth = if u + v / 3 < split { 20.0 } else { 35.0 };
                values.push((truth + noise.sample(&mut rng)) as f32);
                conf.push(if rng.random_bool(0.5) { 1.0 } else { 0.5 });
            }
        }
    }
    (DisparityMap::new(w, h, values).unwrap(), conf, guide)
}

pub const MASK_SIDE: usize = 8;

pub fn random_mask(rng: &mut ChaCha8Rng) -> BinaryMask {
    // A rectangle with a few pixels toggled, so boxes and masks disagree.
    let (x0, y0) = (rng.random_range(0..MASK_SIDE - 1), rng.random_range(0..MASK_SIDE - 1));
    let (x1, y1) = (rng.random_range(x0 + 1..=MASK_SIDE), rng.random_range(y0 + 1..=MASK_SIDE));
    let mut m = BinaryMask::from_fn(MASK_SIDE, MASK_SIDE, |u, v| (x0..x1).contains(&u) && (y0..y1).contains(&v));
    for _ in 0..rng.random_range(0..3) {
        let (u, v) = (rng.random_range(0..MASK_SIDE), rng.random_range(0..MASK_SIDE));
        m.set(u, v, !m.get(u, v));
    }
    if m.count() == 0 {
        m.set(0, 0, true);
    }
    m
}

pub fn random_eval_pair(rng: &mut ChaCha8Rng) -> EvalPair {
    let n_pred = rng.random_range(0..=5);
    let n_gt = rng.random_range(0..=3);
    let mut ids: Vec<u32> = (1..=20).collect();
    let predictions = (0..n_pred)
        .map(|i| {
            let id = ids.remove(rng.random_range(0..ids.len()));
            // Coarse scores force ties.
            let score = rng.random_range(0..4) as f64 / 4.0 + 0.1 * (i % 2) as f64;
            SegmentMask::new(id, "branch", score.min(1.0), random_mask(rng))
        })
        .collect();
    let ground_truth =
        (0..n_gt).map(|i| SegmentMask::new(i as u32 + 1, "branch", 1.0, random_mask(rng))).collect();
    EvalPair { predictions, ground_truth }
}
