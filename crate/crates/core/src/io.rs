//! File formats: PNG rasters, PFM disparity/depth maps and calibration JSON.
//!
//! PFM files are written little-endian (scale `-1.0`), bottom row first as the
//! format prescribes. Invalid pixels are stored as `-1.0` for both disparity
//! and depth maps.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calib::CameraCalibration;
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::maps::{DepthMap, DisparityMap};

/// Value used for invalid pixels in PFM files.
pub const PFM_INVALID: f32 = -1.0;

/// Writes `bytes` to a sibling temp file and renames it over `path`, so readers
/// never observe a partially written artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("not a file path")))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_png(path: &Path) -> Result<ImageBuffer> {
    let img = ::image::open(path).map_err(|source| Error::Image { path: path.into(), source })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        ::image::DynamicImage::ImageLuma8(buf) => ImageBuffer::new(w, h, 1, buf.into_raw()),
        ::image::DynamicImage::ImageRgb8(buf) => ImageBuffer::new(w, h, 3, buf.into_raw()),
        other => Err(Error::Format(format!(
            "{}: {:?} (expected 8-bit gray or RGB)",
            path.display(),
            other.color()
        ))),
    }
}

pub fn encode_png(img: &ImageBuffer) -> Result<Vec<u8>> {
    let color = if img.channels() == 1 {
        ::image::ExtendedColorType::L8
    } else {
        ::image::ExtendedColorType::Rgb8
    };
    let mut out = Vec::new();
    let encoder = ::image::codecs::png::PngEncoder::new(&mut out);
    ::image::ImageEncoder::write_image(
        encoder,
        img.samples(),
        img.width() as u32,
        img.height() as u32,
        color,
    )
    .map_err(|source| Error::Image { path: "<png>".into(), source })?;
    Ok(out)
}

pub fn write_png(path: &Path, img: &ImageBuffer) -> Result<()> {
    write_atomic(path, &encode_png(img)?)
}

fn encode_pfm(width: usize, height: usize, values: impl Fn(usize) -> f32) -> Vec<u8> {
    let mut out = format!("Pf\n{width} {height}\n-1.0\n").into_bytes();
    out.reserve(width * height * 4);
    for v in (0..height).rev() {
        for u in 0..width {
            out.extend_from_slice(&values(v * width + u).to_le_bytes());
        }
    }
    out
}

fn decode_pfm(path: &Path, bytes: &[u8]) -> Result<(usize, usize, Vec<f32>)> {
    let bad = |msg: &str| Error::Format(format!("{}: {msg}", path.display()));
    // Header: three whitespace-terminated tokens after the magic.
    let mut pos = 0;
    let mut tokens = Vec::new();
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated PFM header"));
        }
        tokens.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ASCII header"))?);
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    if tokens[0] != "Pf" {
        return Err(bad("expected single-channel 'Pf' PFM"));
    }
    let width: usize = tokens[1].parse().map_err(|_| bad("bad width"))?;
    let height: usize = tokens[2].parse().map_err(|_| bad("bad height"))?;
    let scale: f32 = tokens[3].parse().map_err(|_| bad("bad scale"))?;
    let little = scale < 0.0;
    let data = bytes.get(pos..).unwrap_or_default();
    if data.len() != width * height * 4 {
        return Err(bad(&format!("expected {} raster bytes, found {}", width * height * 4, data.len())));
    }
    let mut values = vec![0f32; width * height];
    for (i, chunk) in data.chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let value = if little { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
        let (row, col) = (i / width, i % width);
        values[(height - 1 - row) * width + col] = value;
    }
    Ok((width, height, values))
}

pub fn encode_disparity_pfm(disp: &DisparityMap) -> Vec<u8> {
    let values = disp.values();
    encode_pfm(disp.width(), disp.height(), |i| {
        if DisparityMap::is_valid_value(values[i]) {
            values[i]
        } else {
            PFM_INVALID
        }
    })
}

pub fn write_disparity_pfm(path: &Path, disp: &DisparityMap) -> Result<()> {
    write_atomic(path, &encode_disparity_pfm(disp))
}

pub fn read_disparity_pfm(path: &Path) -> Result<DisparityMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (w, h, mut values) = decode_pfm(path, &bytes)?;
    for d in &mut values {
        if !DisparityMap::is_valid_value(*d) {
            *d = DisparityMap::INVALID;
        }
    }
    DisparityMap::new(w, h, values)
}

pub fn encode_depth_pfm(depth: &DepthMap) -> Vec<u8> {
    let values = depth.values();
    encode_pfm(depth.width(), depth.height(), |i| {
        if DepthMap::is_valid_value(values[i]) {
            values[i]
        } else {
            PFM_INVALID
        }
    })
}

pub fn write_depth_pfm(path: &Path, depth: &DepthMap) -> Result<()> {
    write_atomic(path, &encode_depth_pfm(depth))
}

pub fn read_depth_pfm(path: &Path) -> Result<DepthMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (w, h, mut values) = decode_pfm(path, &bytes)?;
    for z in &mut values {
        if !DepthMap::is_valid_value(*z) {
            *z = DepthMap::INVALID;
        }
    }
    DepthMap::new(w, h, values)
}

/// On-disk calibration record. Only rectified pairs are accepted.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    #[serde(flatten)]
    pub calibration: CameraCalibration,
    pub rectified: bool,
}

pub fn parse_calibration(path: &Path, text: &str) -> Result<CameraCalibration> {
    // `flatten` and `deny_unknown_fields` do not combine in serde, so check keys by hand.
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|source| Error::Json { path: path.into(), source })?;
    const KEYS: [&str; 8] = ["fx", "fy", "cx", "cy", "baseline_m", "width", "height", "rectified"];
    if let Some(obj) = value.as_object() {
        if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::Calibration(format!("{}: unknown key '{k}'", path.display())));
        }
    }
    let file: CalibrationFile =
        serde_json::from_value(value).map_err(|source| Error::Json { path: path.into(), source })?;
    if !file.rectified {
        return Err(Error::Calibration(format!(
            "{}: frames must be rectified (\"rectified\": true)",
            path.display()
        )));
    }
    file.calibration.validate()?;
    Ok(file.calibration)
}

pub fn read_calibration(path: &Path) -> Result<CameraCalibration> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_calibration(path, &text)
}

pub fn calibration_json(calib: &CameraCalibration) -> String {
    let file = CalibrationFile { calibration: *calib, rectified: true };
    serde_json::to_string_pretty(&file).expect("calibration serializes")
}

pub fn write_calibration(path: &Path, calib: &CameraCalibration) -> Result<()> {
    write_atomic(path, calibration_json(calib).as_bytes())
}
