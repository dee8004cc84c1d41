//! Independent reference implementations used by the integration and
//! acceptance tests. They favor directness over speed.

#![allow(dead_code)]

use std::collections::HashMap;

/// Semi-global aggregation by memoized recursion over every path, with the
/// full `min_k` over previous-pixel disparities. Returns `sum_r L_r` as u64.
pub fn brute_force_aggregate(
    costs: &[u16],
    (w, h, nd): (usize, usize, usize),
    p1: u64,
    p2: u64,
    paths: &[(isize, isize)],
) -> Vec<u64> {
    let cost = |u: usize, v: usize, d: usize| costs[(v * w + u) * nd + d] as u64;
    let mut total = vec![0u64; w * h * nd];
    for &(du, dv) in paths {
        let mut memo: HashMap<(usize, usize), Vec<u64>> = HashMap::new();
        fn path(
            u: usize,
            v: usize,
            dir: (isize, isize),
            dims: (usize, usize, usize),
            p: (u64, u64),
            cost: &dyn Fn(usize, usize, usize) -> u64,
            memo: &mut HashMap<(usize, usize), Vec<u64>>,
        ) -> Vec<u64> {
            if let Some(l) = memo.get(&(u, v)) {
                return l.clone();
            }
            let (w, h, nd) = dims;
            let (pu, pv) = (u as isize - dir.0, v as isize - dir.1);
            let l: Vec<u64> = if pu < 0 || pv < 0 || pu >= w as isize || pv >= h as isize {
                (0..nd).map(|d| cost(u, v, d)).collect()
            } else {
                let prev = path(pu as usize, pv as usize, dir, dims, p, cost, memo);
                let prev_min = *prev.iter().min().unwrap();
                (0..nd)
                    .map(|d| {
                        let best = (0..nd)
                            .map(|k| {
                                prev[k]
                                    + match d.abs_diff(k) {
                                        0 => 0,
                                        1 => p.0,
                                        _ => p.1,
                                    }
                            })
                            .min()
                            .unwrap();
                        cost(u, v, d) + best - prev_min
                    })
                    .collect()
            };
            memo.insert((u, v), l.clone());
            l
        }
        for v in 0..h {
            for u in 0..w {
                let l = path(u, v, (du, dv), (w, h, nd), (p1, p2), &cost, &mut memo);
                for d in 0..nd {
                    total[(v * w + u) * nd + d] += l[d];
                }
            }
        }
    }
    total
}

/// Box `[x_min, y_min, x_max, y_max)` IoU.
pub fn box_iou(a: [f64; 4], b: [f64; 4]) -> f64 {
    let area = |r: [f64; 4]| (r[2] - r[0]).max(0.0) * (r[3] - r[1]).max(0.0);
    let inter = area([a[0].max(b[0]), a[1].max(b[1]), a[2].min(b[2]), a[3].min(b[3])]);
    let union = area(a) + area(b) - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

/// Pixel-set IoU.
pub fn set_iou(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// AP from first principles: rank by (score desc, id asc); each prediction
/// takes the unmatched ground truth of highest IoU (lowest index on ties) at
/// or above the threshold; at each of the 101 recall levels the precision is
/// the maximum over all ranks reaching that recall.
pub fn reference_ap(scores_ids: &[(f64, u32)], ious: &[Vec<f64>], num_gt: usize, threshold: f64) -> f64 {
    if num_gt == 0 {
        return if scores_ids.is_empty() { 1.0 } else { 0.0 };
    }
    if scores_ids.is_empty() {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..scores_ids.len()).collect();
    order.sort_by(|&a, &b| {
        scores_ids[b].0.partial_cmp(&scores_ids[a].0).unwrap().then(scores_ids[a].1.cmp(&scores_ids[b].1))
    });
    let mut matched = vec![false; num_gt];
    let mut points = Vec::new();
    let mut tp = 0usize;
    for (rank, &p) in order.iter().enumerate() {
        let mut best: Option<usize> = None;
        for g in 0..num_gt {
            if matched[g] || ious[p][g] < threshold {
                continue;
            }
            if best.is_none_or(|b| ious[p][g] > ious[p][b]) {
                best = Some(g);
            }
        }
        if let Some(g) = best {
            matched[g] = true;
            tp += 1;
        }
        points.push((tp as f64 / num_gt as f64, tp as f64 / (rank + 1) as f64));
    }
    let mut sum = 0.0;
    for i in 0..=100 {
        let r = i as f64 / 100.0;
        sum += points.iter().filter(|(rec, _)| *rec >= r).map(|(_, prec)| *prec).fold(0.0, f64::max);
    }
    sum / 101.0
}

/// Direct solve of `(C + lambda L_w) x = C d` by Gaussian elimination with
/// partial pivoting. `guide` holds 8-bit intensities, weights are
/// `exp(-|I_p - I_q| / 255 / sigma)` over 4-neighbors.
pub fn dense_wls(
    (w, h): (usize, usize),
    disp: &[f32],
    conf: &[f32],
    guide: &[u8],
    lambda: f64,
    sigma: f64,
) -> Vec<f64> {
    let n = w * h;
    let mut a = vec![vec![0.0f64; n + 1]; n];
    for p in 0..n {
        let c = conf[p] as f64;
        a[p][p] += c;
        if c > 0.0 {
            a[p][n] = c * disp[p] as f64;
        }
    }
    let mut edge = |p: usize, q: usize| {
        let wt = lambda * (-(guide[p] as f64 - guide[q] as f64).abs() / 255.0 / sigma).exp();
        a[p][p] += wt;
        a[q][q] += wt;
        a[p][q] -= wt;
        a[q][p] -= wt;
    };
    for v in 0..h {
        for u in 0..w {
            if u + 1 < w {
                edge(v * w + u, v * w + u + 1);
            }
            if v + 1 < h {
                edge(v * w + u, (v + 1) * w + u);
            }
        }
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        let (top, rest) = a.split_at_mut(col + 1);
        let prow = &top[col];
        for row in rest.iter_mut() {
            let f = row[col] / prow[col];
            if f != 0.0 {
                for k in col..=n {
                    row[k] -= f * prow[k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    x
}

/// Robust depth statistics computed in two explicit passes over sorted data.
pub struct TwoPassStats {
    pub kept: Vec<usize>,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
}

fn sorted_median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Outliers are samples farther than 3 robust sigmas from the median, where
/// sigma is 1.4826 MAD, or 1.253314 times the mean absolute deviation when
/// the MAD is zero; a zero sigma keeps everything.
pub fn two_pass_stats(depths: &[f64]) -> TwoPassStats {
    let median = sorted_median(depths.to_vec());
    let dev: Vec<f64> = depths.iter().map(|z| (z - median).abs()).collect();
    let mad = sorted_median(dev.clone());
    let sigma = if mad > 0.0 { 1.4826 * mad } else { 1.253314 * dev.iter().sum::<f64>() / dev.len() as f64 };
    let kept: Vec<usize> =
        (0..depths.len()).filter(|&i| sigma == 0.0 || dev[i] <= 3.0 * sigma).collect();
    let vals: Vec<f64> = kept.iter().map(|&i| depths[i]).collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let std = (vals.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / n).sqrt();
    TwoPassStats { median: sorted_median(vals), kept, mean, std }
}
