use crate::maps::DisparityMap;

/// Invalidates 4-connected components smaller than `window` pixels. Two valid
/// neighbors are connected when their disparities differ by at most `range`.
pub fn speckle_filter(disp: &DisparityMap, window: usize, range: f32) -> DisparityMap {
    let (w, h) = disp.dims();
    let values = disp.values();
    let mut out = disp.clone();
    let mut label = vec![u32::MAX; w * h];
    let mut stack = Vec::new();
    let mut component = Vec::new();
    let mut next = 0u32;

    for seed in 0..w * h {
        if label[seed] != u32::MAX || !DisparityMap::is_valid_value(values[seed]) {
            continue;
        }
        label[seed] = next;
        stack.push(seed);
        component.clear();
        while let Some(i) = stack.pop() {
            component.push(i);
            let (u, v) = (i % w, i / w);
            let d = values[i];
            let neighbors = [
                (u > 0).then(|| i - 1),
                (u + 1 < w).then(|| i + 1),
                (v > 0).then(|| i - w),
                (v + 1 < h).then(|| i + w),
            ];
            for j in neighbors.into_iter().flatten() {
                if label[j] == u32::MAX
                    && DisparityMap::is_valid_value(values[j])
                    && (values[j] - d).abs() <= range
                {
                    label[j] = next;
                    stack.push(j);
                }
            }
        }
        if component.len() < window {
            for &i in &component {
                out.values_mut()[i] = DisparityMap::INVALID;
            }
        }
        next += 1;
    }
    out
}
