mod common {
    pub mod oracles;
    pub mod scenarios;
}

use branchdepth::fusion::{summarize, DepthSample};
use branchdepth::{back_project, BinaryMask, CameraCalibration, SegmentMask};
use common::oracles::two_pass_stats;
use common::scenarios::outlier_injection;
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #[test]
    fn summary_matches_two_pass_reference(
        base in 0.3f64..20.0,
        jitter in prop::collection::vec(-0.2f64..0.2, 1..300),
        spikes in prop::collection::vec((0usize..300, 1.0f64..80.0), 0..6),
        repeats in 0usize..4,
    ) {
        let calib = CameraCalibration::new(650.0, 640.0, 31.5, 22.0, 0.1, 64, 48).unwrap();
        let mut depths: Vec<f64> = jitter.iter().map(|j| base + j).collect();
        // Repeated values exercise the zero-MAD fallback.
        for i in 0..repeats.min(depths.len()) {
            depths[i] = base;
        }
        for &(i, z) in &spikes {
            let k = i % depths.len();
            depths[k] = z;
        }
        let samples: Vec<DepthSample> =
            depths.iter().enumerate().map(|(i, &z)| DepthSample { u: i % 64, v: i / 64, depth: z }).collect();
        let mask = SegmentMask::new(3, "branch", 0.8, BinaryMask::from_fn(64, 48, |u, v| v * 64 + u < depths.len()));
        let est = summarize(&mask, &samples, &calib, 0.25, depths.len()).unwrap();
        let r = two_pass_stats(&depths);
        prop_assert!(close(est.median_depth, r.median));
        prop_assert!(close(est.mean_depth, r.mean));
        prop_assert!(close(est.std_depth, r.std) || (est.std_depth - r.std).abs() < 1e-12);
        prop_assert_eq!(est.outlier_count, depths.len() - r.kept.len());
        let n = r.kept.len() as f64;
        let mu = r.kept.iter().map(|&i| samples[i].u as f64).sum::<f64>() / n;
        let mv = r.kept.iter().map(|&i| samples[i].v as f64).sum::<f64>() / n;
        let c = back_project(mu, mv, r.median, &calib).unwrap();
        prop_assert!(close(est.centroid.x, c.x) || (est.centroid.x - c.x).abs() < 1e-12);
        prop_assert!(close(est.centroid.y, c.y) || (est.centroid.y - c.y).abs() < 1e-12);
        prop_assert!(close(est.centroid.z, c.z));
    }
}

#[test]
fn one_percent_far_outliers_barely_move_the_median() {
    for seed in 0..5 {
        let (clean, dirty) = outlier_injection(seed);
        assert!((dirty - clean).abs() / clean < 0.005, "seed {seed}: {clean} -> {dirty}");
    }
}
