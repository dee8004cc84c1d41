mod common {
    pub mod oracles;
    pub mod scenarios;
}

use branchdepth::metrics::{
    ap_per_threshold, average_precision, iou_thresholds, map_50_95, rmse, DepthPair, EvalPair, IouMode,
};
use branchdepth::SegmentMask;
use common::scenarios::{random_eval_pair, random_mask};
use common::oracles::{box_iou, reference_ap, set_iou};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bbox_array(m: &SegmentMask) -> [f64; 4] {
    let b = &m.bbox;
    [b.x_min, b.y_min, b.x_max, b.y_max]
}

#[test]
fn average_precision_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3e7);
    for case in 0..1000 {
        let pair = random_eval_pair(&mut rng);
        let keys: Vec<(f64, u32)> = pair.predictions.iter().map(|p| (p.score, p.instance_id)).collect();
        for mode in [IouMode::Box, IouMode::Mask] {
            let ious: Vec<Vec<f64>> = pair
                .predictions
                .iter()
                .map(|p| {
                    pair.ground_truth
                        .iter()
                        .map(|g| match mode {
                            IouMode::Box => box_iou(bbox_array(p), bbox_array(g)),
                            IouMode::Mask => set_iou(p.mask.bits(), g.mask.bits()),
                        })
                        .collect()
                })
                .collect();
            let per = ap_per_threshold(&pair, mode).unwrap();
            for (k, t) in iou_thresholds().into_iter().enumerate() {
                let expected = reference_ap(&keys, &ious, pair.ground_truth.len(), t);
                let got = average_precision(&pair, t, mode).unwrap();
                assert!((got - expected).abs() <= 1e-9, "case {case} {mode:?} t={t}: {got} vs {expected}");
                assert!((per[k] - expected).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn perfect_predictions_score_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gt: Vec<SegmentMask> =
        (0..3).map(|i| SegmentMask::new(i + 1, "branch", 1.0, random_mask(&mut rng))).collect();
    let preds = gt.iter().map(|g| SegmentMask::new(g.instance_id + 10, "branch", 0.9, g.mask.clone())).collect();
    let pair = EvalPair { predictions: preds, ground_truth: gt };
    assert_eq!(map_50_95(&pair, IouMode::Box).unwrap(), 1.0);
    assert_eq!(map_50_95(&pair, IouMode::Mask).unwrap(), 1.0);
}

#[test]
fn rmse_hand_case() {
    let pairs: Vec<DepthPair> =
        [(1.0, 2.0), (2.0, 3.0), (3.0, 4.0)].map(|(e, g)| DepthPair { estimate: e, ground_truth: g }).to_vec();
    assert_eq!(rmse(&pairs).unwrap(), 1.0);
}
