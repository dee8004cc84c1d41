//! False-color renderings with a legend strip.
//!
//! Colormap: piecewise-linear through dark blue (0, 0, 128), blue (0, 0, 255),
//! cyan (0, 255, 255), yellow (255, 255, 0), red (255, 0, 0) and dark red
//! (128, 0, 0) at equal spacing. Invalid pixels are black. The legend strip
//! below the image shows the color bar with its minimum and maximum values
//! and unit.

use branchdepth::{BinaryMask, DepthMap, DisparityMap, ImageBuffer};

const ANCHORS: [[f64; 3]; 6] = [
    [0.0, 0.0, 128.0],
    [0.0, 0.0, 255.0],
    [0.0, 255.0, 255.0],
    [255.0, 255.0, 0.0],
    [255.0, 0.0, 0.0],
    [128.0, 0.0, 0.0],
];

/// Legend strip height in pixels.
pub const LEGEND_HEIGHT: usize = 24;
const GLYPH_SCALE: usize = 2;
const MARGIN: usize = 4;

/// Color at `t` in `[0, 1]`.
pub fn colormap(t: f64) -> [u8; 3] {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (ANCHORS.len() - 1) as f64;
    let i = (x.floor() as usize).min(ANCHORS.len() - 2);
    let f = x - i as f64;
    let (a, b) = (ANCHORS[i], ANCHORS[i + 1]);
    [0, 1, 2].map(|c| (a[c] + (b[c] - a[c]) * f).round() as u8)
}

/// 3x5 glyphs, rows top to bottom, bit 2 = left column.
fn glyph(c: char) -> Option<[u8; 5]> {
    Some(match c {
        '0' => [7, 5, 5, 5, 7],
        '1' => [2, 6, 2, 2, 7],
        '2' => [7, 1, 7, 4, 7],
        '3' => [7, 1, 7, 1, 7],
        '4' => [5, 5, 7, 1, 1],
        '5' => [7, 4, 7, 1, 7],
        '6' => [7, 4, 7, 5, 7],
        '7' => [7, 1, 1, 1, 1],
        '8' => [7, 5, 7, 5, 7],
        '9' => [7, 5, 7, 1, 7],
        '.' => [0, 0, 0, 0, 2],
        '-' => [0, 0, 7, 0, 0],
        'm' => [0, 0, 7, 7, 5],
        'p' => [0, 7, 5, 7, 4],
        'x' => [0, 5, 2, 2, 5],
        ' ' => [0; 5],
        _ => return None,
    })
}

/// RGB raster under construction.
pub struct Canvas {
    width: usize,
    height: usize,
    rgb: Vec<u8>,
}

impl Canvas {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, rgb: vec![0; width * height * 3] }
    }

    pub fn set(&mut self, u: usize, v: usize, color: [u8; 3]) {
        if u < self.width && v < self.height {
            let i = (v * self.width + u) * 3;
            self.rgb[i..i + 3].copy_from_slice(&color);
        }
    }

    pub fn get(&self, u: usize, v: usize) -> [u8; 3] {
        let i = (v * self.width + u) * 3;
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    fn fill(&mut self, u0: usize, v0: usize, w: usize, h: usize, color: [u8; 3]) {
        for v in v0..v0 + h {
            for u in u0..u0 + w {
                self.set(u, v, color);
            }
        }
    }

    /// Width in pixels of `text` when drawn.
    pub fn text_width(text: &str) -> usize {
        text.chars().count() * 4 * GLYPH_SCALE
    }

    /// Draws `text` with its top-left corner at `(u, v)`; unknown characters are skipped.
    pub fn text(&mut self, u: usize, v: usize, text: &str, color: [u8; 3]) {
        for (k, c) in text.chars().enumerate() {
            let Some(rows) = glyph(c) else { continue };
            let x0 = u + k * 4 * GLYPH_SCALE;
            for (row, bits) in rows.iter().enumerate() {
                for col in 0..3 {
                    if bits & (4 >> col) != 0 {
                        self.fill(x0 + col * GLYPH_SCALE, v + row * GLYPH_SCALE, GLYPH_SCALE, GLYPH_SCALE, color);
                    }
                }
            }
        }
    }

    pub fn into_image(self) -> ImageBuffer {
        ImageBuffer::new(self.width, self.height, 3, self.rgb).expect("canvas dimensions are consistent")
    }
}

fn label(value: f64) -> String {
    if value.abs() >= 100.0 {
        format!("{value:.0}")
    } else {
        format!("{value:.2}")
    }
}

/// Draws the legend strip into the bottom `LEGEND_HEIGHT` rows.
fn legend(canvas: &mut Canvas, range: Option<(f64, f64)>, unit: &str) {
    let (w, top) = (canvas.width, canvas.height - LEGEND_HEIGHT);
    canvas.fill(0, top, w, LEGEND_HEIGHT, [32, 32, 32]);
    let white = [255, 255, 255];
    let text_v = top + (LEGEND_HEIGHT - 5 * GLYPH_SCALE) / 2;
    let Some((lo, hi)) = range else {
        canvas.text(MARGIN, text_v, "-", white);
        return;
    };
    let lo_text = label(lo);
    let hi_text = format!("{} {unit}", label(hi));
    let bar_u0 = MARGIN + Canvas::text_width(&lo_text) + MARGIN;
    let bar_u1 = w.saturating_sub(MARGIN + Canvas::text_width(&hi_text) + MARGIN);
    canvas.text(MARGIN, text_v, &lo_text, white);
    canvas.text(bar_u1 + MARGIN, text_v, &hi_text, white);
    if bar_u1 > bar_u0 {
        let span = (bar_u1 - bar_u0 - 1).max(1) as f64;
        for u in bar_u0..bar_u1 {
            let color = colormap((u - bar_u0) as f64 / span);
            canvas.fill(u, top + 6, 1, LEGEND_HEIGHT - 12, color);
        }
    }
}

fn render_values(width: usize, height: usize, values: &[f32], valid: impl Fn(f32) -> bool, unit: &str) -> ImageBuffer {
    let range = values
        .iter()
        .copied()
        .filter(|&x| valid(x))
        .fold(None, |acc: Option<(f32, f32)>, x| Some(acc.map_or((x, x), |(lo, hi)| (lo.min(x), hi.max(x)))))
        .map(|(lo, hi)| (lo as f64, hi as f64));
    let mut canvas = Canvas::new(width, height + LEGEND_HEIGHT);
    if let Some((lo, hi)) = range {
        let span = if hi > lo { hi - lo } else { 1.0 };
        for (i, &x) in values.iter().enumerate() {
            if valid(x) {
                canvas.set(i % width, i / width, colormap((x as f64 - lo) / span));
            }
        }
    }
    legend(&mut canvas, range, unit);
    canvas.into_image()
}

/// Disparity map in false color, legend in pixels.
pub fn render_disparity(disp: &DisparityMap) -> ImageBuffer {
    render_values(disp.width(), disp.height(), disp.values(), DisparityMap::is_valid_value, "px")
}

/// Depth map in false color, legend in meters.
pub fn render_depth(depth: &DepthMap) -> ImageBuffer {
    render_values(depth.width(), depth.height(), depth.values(), DepthMap::is_valid_value, "m")
}

/// A mask to tint in an overlay; `None` depth draws it gray.
pub struct OverlayItem<'a> {
    pub mask: &'a BinaryMask,
    pub depth: Option<f64>,
}

/// Grayscale `base` with each mask blended half-way toward the color of its
/// depth on a shared scale, plus a depth legend.
pub fn render_overlay(base: &ImageBuffer, items: &[OverlayItem]) -> ImageBuffer {
    let (w, h) = base.dims();
    let range = items
        .iter()
        .filter_map(|it| it.depth)
        .fold(None, |acc: Option<(f64, f64)>, z| Some(acc.map_or((z, z), |(lo, hi)| (lo.min(z), hi.max(z)))));
    let mut canvas = Canvas::new(w, h + LEGEND_HEIGHT);
    for v in 0..h {
        for u in 0..w {
            let g = base.get(u, v);
            canvas.set(u, v, [g, g, g]);
        }
    }
    for it in items {
        let color = match (it.depth, range) {
            (Some(z), Some((lo, hi))) => colormap(if hi > lo { (z - lo) / (hi - lo) } else { 0.5 }),
            _ => [160, 160, 160],
        };
        for (u, v) in it.mask.pixels() {
            let old = canvas.get(u, v);
            canvas.set(u, v, [0, 1, 2].map(|c| ((old[c] as u16 + color[c] as u16) / 2) as u8));
        }
    }
    legend(&mut canvas, range, "m");
    canvas.into_image()
}
