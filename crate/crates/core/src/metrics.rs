//! Detection/segmentation AP and depth RMSE.
//!
//! AP follows the COCO convention: predictions ranked by descending score
//! (ties broken by `instance_id`), each greedily matched to the unmatched
//! ground truth of highest IoU at or above the threshold, and precision
//! interpolated at 101 recall points.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BBox, BinaryMask, SegmentMask};

/// IoU thresholds 0.50, 0.55, ..., 0.95.
pub fn iou_thresholds() -> [f64; 10] {
    std::array::from_fn(|i| (50 + 5 * i) as f64 / 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IouMode {
    Box,
    Mask,
}

/// Predictions and ground truth of one frame.
#[derive(Debug, Clone, Default)]
pub struct EvalPair {
    pub predictions: Vec<SegmentMask>,
    pub ground_truth: Vec<SegmentMask>,
}

pub fn iou_box(a: &BBox, b: &BBox) -> f64 {
    let iw = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let ih = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

pub fn iou_mask(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::Shape(format!("masks {:?} and {:?}", a.dims(), b.dims())));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

/// IoU of every prediction (rows) against every ground truth (columns).
pub fn iou_matrix(pair: &EvalPair, mode: IouMode) -> Result<Vec<Vec<f64>>> {
    pair.predictions
        .iter()
        .map(|p| {
            pair.ground_truth
                .iter()
                .map(|g| match mode {
                    IouMode::Box => Ok(iou_box(&p.bbox, &g.bbox)),
                    IouMode::Mask => iou_mask(&p.mask, &g.mask),
                })
                .collect()
        })
        .collect()
}

/// Prediction indices in evaluation order.
pub fn ranking(predictions: &[SegmentMask]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..predictions.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&predictions[a], &predictions[b]);
        pb.score
            .partial_cmp(&pa.score)
            .unwrap_or(Ordering::Equal)
            .then(pa.instance_id.cmp(&pb.instance_id))
    });
    order
}

/// True/false-positive flags along the ranking, given a precomputed IoU matrix.
pub fn match_ranked(ious: &[Vec<f64>], order: &[usize], num_gt: usize, threshold: f64) -> Vec<bool> {
    let mut taken = vec![false; num_gt];
    order
        .iter()
        .map(|&p| {
            let best = (0..num_gt)
                .filter(|&g| !taken[g] && ious[p][g] >= threshold)
                .fold(None::<usize>, |best, g| match best {
                    Some(b) if ious[p][b] >= ious[p][g] => Some(b),
                    _ => Some(g),
                });
            if let Some(g) = best {
                taken[g] = true;
            }
            best.is_some()
        })
        .collect()
}

/// 101-point interpolated AP from ranked TP flags.
pub fn interpolated_ap(tp: &[bool], num_gt: usize) -> f64 {
    let mut precision = Vec::with_capacity(tp.len());
    let mut recall = Vec::with_capacity(tp.len());
    let mut hits = 0usize;
    for (k, &t) in tp.iter().enumerate() {
        hits += t as usize;
        precision.push(hits as f64 / (k + 1) as f64);
        recall.push(hits as f64 / num_gt as f64);
    }
    // Precision envelope: max precision at any later rank.
    for k in (0..precision.len().saturating_sub(1)).rev() {
        precision[k] = precision[k].max(precision[k + 1]);
    }
    let mut sum = 0.0;
    let mut k = 0;
    for i in 0..=100 {
        let r = i as f64 / 100.0;
        while k < recall.len() && recall[k] < r {
            k += 1;
        }
        if k < recall.len() {
            sum += precision[k];
        }
    }
    sum / 101.0
}

fn empty_convention(pair: &EvalPair) -> Option<f64> {
    match (pair.ground_truth.is_empty(), pair.predictions.is_empty()) {
        (true, true) => Some(1.0),
        (true, false) => Some(0.0),
        (false, true) => Some(0.0),
        (false, false) => None,
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if !(0.5..=0.95).contains(&t) {
        return Err(Error::Param(format!("IoU threshold {t} outside [0.5, 0.95]")));
    }
    Ok(())
}

/// AP at one IoU threshold. Without ground truth AP is 1 when there are also
/// no predictions and 0 otherwise.
pub fn average_precision(pair: &EvalPair, iou_threshold: f64, mode: IouMode) -> Result<f64> {
    check_threshold(iou_threshold)?;
    if let Some(ap) = empty_convention(pair) {
        return Ok(ap);
    }
    let ious = iou_matrix(pair, mode)?;
    let tp = match_ranked(&ious, &ranking(&pair.predictions), pair.ground_truth.len(), iou_threshold);
    Ok(interpolated_ap(&tp, pair.ground_truth.len()))
}

/// AP at each of the ten thresholds.
pub fn ap_per_threshold(pair: &EvalPair, mode: IouMode) -> Result<[f64; 10]> {
    let thresholds = iou_thresholds();
    if let Some(ap) = empty_convention(pair) {
        return Ok([ap; 10]);
    }
    let ious = iou_matrix(pair, mode)?;
    let order = ranking(&pair.predictions);
    Ok(thresholds.map(|t| interpolated_ap(&match_ranked(&ious, &order, pair.ground_truth.len(), t), pair.ground_truth.len())))
}

/// Mean AP over IoU thresholds 0.50:0.05:0.95.
pub fn map_50_95(pair: &EvalPair, mode: IouMode) -> Result<f64> {
    Ok(ap_per_threshold(pair, mode)?.iter().sum::<f64>() / 10.0)
}

/// Estimated/ground-truth depth pairs, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthPair {
    pub estimate: f64,
    pub ground_truth: f64,
}

/// `sqrt(mean((y - y_hat)^2))`.
pub fn rmse(pairs: &[DepthPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyEval);
    }
    let sq: f64 = pairs.iter().map(|p| (p.ground_truth - p.estimate).powi(2)).sum();
    Ok((sq / pairs.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(est: &[f64], gt: &[f64]) -> Vec<DepthPair> {
        est.iter().zip(gt).map(|(&e, &g)| DepthPair { estimate: e, ground_truth: g }).collect()
    }

    fn det(id: u32, score: f64, bbox: BBox) -> SegmentMask {
        let mut m = SegmentMask::new(id, "branch", score, BinaryMask::empty(1, 1));
        m.bbox = bbox;
        m
    }

    #[test]
    fn box_iou_examples() {
        let a = BBox::new(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou_box(&a, &a), 1.0);
        assert_eq!(iou_box(&a, &BBox::new(5.0, 5.0, 6.0, 6.0)), 0.0);
        assert!((iou_box(&a, &BBox::new(1.0, 0.0, 3.0, 2.0)) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(iou_box(&BBox::EMPTY, &BBox::EMPTY), 0.0);
    }

    #[test]
    fn mask_iou_examples() {
        let a = BinaryMask::from_fn(20, 1, |u, _| u < 10);
        let b = BinaryMask::from_fn(20, 1, |u, _| (5..15).contains(&u));
        let c = BinaryMask::from_fn(20, 1, |u, _| u >= 10);
        assert_eq!(iou_mask(&a, &a).unwrap(), 1.0);
        assert_eq!(iou_mask(&a, &c).unwrap(), 0.0);
        assert!((iou_mask(&a, &b).unwrap() - 5.0 / 15.0).abs() < 1e-15);
        assert_eq!(iou_mask(&BinaryMask::empty(2, 2), &BinaryMask::empty(2, 2)).unwrap(), 0.0);
        assert!(iou_mask(&a, &BinaryMask::empty(19, 1)).is_err());
    }

    #[test]
    fn ap_conventions() {
        let b = BBox::new(0.0, 0.0, 4.0, 4.0);
        let perfect = EvalPair { predictions: vec![det(1, 0.9, b)], ground_truth: vec![det(1, 0.0, b)] };
        for t in iou_thresholds() {
            assert_eq!(average_precision(&perfect, t, IouMode::Box).unwrap(), 1.0);
        }
        assert_eq!(map_50_95(&perfect, IouMode::Box).unwrap(), 1.0);

        let none = EvalPair { predictions: vec![], ground_truth: vec![det(1, 0.0, b)] };
        assert_eq!(average_precision(&none, 0.5, IouMode::Box).unwrap(), 0.0);
        let only_preds = EvalPair { predictions: vec![det(1, 0.3, b)], ground_truth: vec![] };
        assert_eq!(average_precision(&only_preds, 0.5, IouMode::Box).unwrap(), 0.0);
        assert_eq!(average_precision(&EvalPair::default(), 0.5, IouMode::Box).unwrap(), 1.0);
        assert!(average_precision(&perfect, 0.3, IouMode::Box).is_err());
    }

    #[test]
    fn map_counts_thresholds_below_iou() {
        // Mask IoU 0.72: 18 shared pixels out of 25 in the union.
        let gt = BinaryMask::from_fn(25, 1, |u, _| u < 20);
        let pred = BinaryMask::from_fn(25, 1, |u, _| (2..25).contains(&u));
        assert!((iou_mask(&gt, &pred).unwrap() - 0.72).abs() < 1e-12);
        let pair = EvalPair {
            predictions: vec![SegmentMask::new(1, "branch", 0.8, pred)],
            ground_truth: vec![SegmentMask::new(1, "branch", 1.0, gt)],
        };
        let aps = ap_per_threshold(&pair, IouMode::Mask).unwrap();
        let expected: Vec<f64> = iou_thresholds().iter().map(|&t| if t <= 0.72 { 1.0 } else { 0.0 }).collect();
        assert_eq!(aps.to_vec(), expected);
        assert_eq!(map_50_95(&pair, IouMode::Mask).unwrap(), 0.5);
    }

    #[test]
    fn below_threshold_predictions_score_zero() {
        let pair = EvalPair {
            predictions: vec![det(1, 0.9, BBox::new(0.0, 0.0, 2.0, 2.0))],
            ground_truth: vec![det(1, 0.0, BBox::new(1.0, 0.0, 3.0, 2.0))],
        };
        assert_eq!(map_50_95(&pair, IouMode::Box).unwrap(), 0.0);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&pair(&[1.0, 2.0], &[1.0, 2.0])).unwrap(), 0.0);
        assert_eq!(rmse(&pair(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0])).unwrap(), 1.0);
        assert!((rmse(&pair(&[3.0, 4.0], &[0.0, 0.0])).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(rmse(&[]), Err(Error::EmptyEval)));
    }
}
