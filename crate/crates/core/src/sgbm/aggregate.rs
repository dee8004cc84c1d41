//! Semi-global cost aggregation.
//!
//! Along each path direction `r` the path cost obeys
//!
//! ```text
//! L_r(p, d) = C(p, d) + min(L_r(p-r, d),
//!                           L_r(p-r, d-1) + P1,
//!                           L_r(p-r, d+1) + P1,
//!                           min_k L_r(p-r, k) + P2) - min_k L_r(p-r, k)
//! ```
//!
//! with `L_r = C` where `p - r` leaves the image. The aggregated volume is the
//! sum over paths. Paths are accumulated one at a time; rows of the horizontal
//! paths and columns within a row of the other paths are independent and run
//! in parallel. Integer addition keeps the result independent of scheduling.

use rayon::prelude::*;

use super::cost::CostVolume;
use super::SgbmParams;
use crate::error::{Error, Result};

/// Path directions `(du, dv)`; the first four are used for 4-path aggregation.
pub const PATH_DIRECTIONS: [(isize, isize); 8] =
    [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)];

/// Pixels per parallel work item in the row-sequential passes.
const COLUMN_CHUNK: usize = 64;

/// One recurrence step. Returns `min_d out[d]`.
#[inline]
fn step(cost: &[u16], prev: &[u16], prev_min: u32, p1: u32, p2: u32, out: &mut [u16]) -> u32 {
    let n = cost.len();
    let jump = prev_min + p2;
    let mut min = u32::MAX;
    let mut relax = |d: usize, best: u32| {
        let l = cost[d] as u32 + best - prev_min;
        out[d] = l as u16;
        min = min.min(l);
    };
    if n == 1 {
        relax(0, (prev[0] as u32).min(jump));
        return min;
    }
    relax(0, (prev[0] as u32).min(prev[1] as u32 + p1).min(jump));
    for d in 1..n - 1 {
        let best = (prev[d] as u32)
            .min(prev[d - 1] as u32 + p1)
            .min(prev[d + 1] as u32 + p1)
            .min(jump);
        relax(d, best);
    }
    relax(n - 1, (prev[n - 1] as u32).min(prev[n - 2] as u32 + p1).min(jump));
    min
}

#[inline]
fn start(cost: &[u16], out: &mut [u16]) -> u32 {
    out.copy_from_slice(cost);
    cost.iter().copied().min().unwrap_or(0) as u32
}

#[inline]
fn accumulate(total: &mut [u16], path: &[u16]) {
    for (t, l) in total.iter_mut().zip(path) {
        *t += *l;
    }
}

/// Adds one path's costs into `total`.
fn accumulate_path(vol: &CostVolume, (du, dv): (isize, isize), p1: u32, p2: u32, total: &mut [u16]) {
    let (w, h, nd) = (vol.width(), vol.height(), vol.num_disparities());
    let row_len = w * nd;
    let costs = vol.costs();

    if dv == 0 {
        total
            .par_chunks_mut(row_len)
            .zip(costs.par_chunks(row_len))
            .for_each(|(total_row, cost_row)| {
                let mut prev = vec![0u16; nd];
                let mut cur = vec![0u16; nd];
                let mut prev_min = 0;
                let columns: Box<dyn Iterator<Item = usize>> =
                    if du > 0 { Box::new(0..w) } else { Box::new((0..w).rev()) };
                for (i, u) in columns.enumerate() {
                    let c = &cost_row[u * nd..(u + 1) * nd];
                    prev_min = if i == 0 {
                        start(c, &mut cur)
                    } else {
                        step(c, &prev, prev_min, p1, p2, &mut cur)
                    };
                    accumulate(&mut total_row[u * nd..(u + 1) * nd], &cur);
                    std::mem::swap(&mut prev, &mut cur);
                }
            });
        return;
    }

    let rows: Vec<usize> = if dv > 0 { (0..h).collect() } else { (0..h).rev().collect() };
    let mut prev = vec![0u16; row_len];
    let mut prev_min = vec![0u32; w];
    let mut cur = vec![0u16; row_len];
    let mut cur_min = vec![0u32; w];
    for (i, &v) in rows.iter().enumerate() {
        let cost_row = &costs[v * row_len..(v + 1) * row_len];
        let total_row = &mut total[v * row_len..(v + 1) * row_len];
        let (prev_ref, prev_min_ref) = (&prev, &prev_min);
        cur.par_chunks_mut(COLUMN_CHUNK * nd)
            .zip(cur_min.par_chunks_mut(COLUMN_CHUNK))
            .zip(total_row.par_chunks_mut(COLUMN_CHUNK * nd))
            .enumerate()
            .for_each(|(chunk, ((cur_chunk, min_chunk), total_chunk))| {
                let u0 = chunk * COLUMN_CHUNK;
                for (j, out) in cur_chunk.chunks_exact_mut(nd).enumerate() {
                    let u = u0 + j;
                    let c = &cost_row[u * nd..(u + 1) * nd];
                    let pu = u as isize - du;
                    min_chunk[j] = if i == 0 || pu < 0 || pu >= w as isize {
                        start(c, out)
                    } else {
                        let pu = pu as usize;
                        step(c, &prev_ref[pu * nd..(pu + 1) * nd], prev_min_ref[pu], p1, p2, out)
                    };
                    accumulate(&mut total_chunk[j * nd..(j + 1) * nd], out);
                }
            });
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut prev_min, &mut cur_min);
    }
}

/// Sums the per-path semi-global costs over `params.num_paths` directions.
pub fn aggregate_costs(volume: &CostVolume, params: &SgbmParams) -> Result<CostVolume> {
    if params.num_paths != 4 && params.num_paths != 8 {
        return Err(Error::Param(format!("num_paths must be 4 or 8, got {}", params.num_paths)));
    }
    let max_cost = volume.costs().iter().copied().max().unwrap_or(0) as u64;
    // Each path cost is bounded by C + P2, so the sum must fit the 16-bit volume.
    let bound = params.num_paths as u64 * (max_cost + params.p2 as u64);
    if bound > u16::MAX as u64 {
        return Err(Error::Param(format!(
            "aggregated costs may reach {bound}, beyond the 16-bit volume; lower p2"
        )));
    }
    let mut total = vec![0u16; volume.costs().len()];
    for &dir in &PATH_DIRECTIONS[..params.num_paths] {
        accumulate_path(volume, dir, params.p1, params.p2, &mut total);
    }
    CostVolume::new(volume.width(), volume.height(), volume.num_disparities(), total)
}
