//! Mask exchange format shared with external detectors.
//!
//! A frame is described by a JSON manifest
//!
//! ```json
//! {"frame_id": "f0", "width": 640, "height": 480,
//!  "instances": [{"instance_id": 1, "label": "branch", "score": 0.9,
//!                 "bbox": [x_min, y_min, x_max, y_max], "mask_file": "masks/1.png"}]}
//! ```
//!
//! plus one 8-bit grayscale PNG per instance (255 = mask, 0 = background).
//! `mask_file` is relative to the manifest's directory and `bbox` is the tight
//! box of the mask in pixel-edge coordinates (`x_max` exclusive).

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::io::{read_png, write_atomic, write_png};
use crate::mask::{BBox, BinaryMask, SegmentMask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestInstance {
    pub instance_id: u32,
    pub label: String,
    pub score: f64,
    pub bbox: BBox,
    pub mask_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskManifest {
    pub frame_id: String,
    pub width: usize,
    pub height: usize,
    pub instances: Vec<ManifestInstance>,
}

/// A manifest together with its decoded masks.
#[derive(Debug, Clone)]
pub struct MaskFrame {
    pub frame_id: String,
    pub width: usize,
    pub height: usize,
    pub masks: Vec<SegmentMask>,
}

fn invalid(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Manifest(format!("{}: {msg}", path.display()))
}

/// Decodes a mask PNG: single-channel, values 0 or 255 only.
pub fn read_mask_png(path: &Path) -> Result<BinaryMask> {
    let img = read_png(path).map_err(|e| invalid(path, e))?;
    if img.channels() != 1 {
        return Err(invalid(path, "mask PNG must be 8-bit grayscale"));
    }
    if let Some(bad) = img.samples().iter().find(|&&s| s != 0 && s != 255) {
        return Err(invalid(path, format!("mask value {bad} (expected 0 or 255)")));
    }
    BinaryMask::new(img.width(), img.height(), img.samples().iter().map(|&s| s == 255).collect())
}

pub fn mask_to_image(mask: &BinaryMask) -> ImageBuffer {
    let samples = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    ImageBuffer::gray(mask.width(), mask.height(), samples).expect("mask dimensions are non-zero")
}

/// Checks the manifest document itself, without touching mask files.
pub fn validate_manifest(path: &Path, manifest: &MaskManifest) -> Result<()> {
    if manifest.width == 0 || manifest.height == 0 {
        return Err(invalid(path, "width and height must be positive"));
    }
    let mut seen = HashSet::new();
    for inst in &manifest.instances {
        if !seen.insert(inst.instance_id) {
            return Err(invalid(path, format!("duplicate instance_id {}", inst.instance_id)));
        }
        if !(0.0..=1.0).contains(&inst.score) {
            return Err(invalid(path, format!("instance {}: score {} outside [0, 1]", inst.instance_id, inst.score)));
        }
        if !inst.bbox.is_well_formed() {
            return Err(invalid(path, format!("instance {}: malformed bbox", inst.instance_id)));
        }
        if inst.mask_file.is_empty() {
            return Err(invalid(path, format!("instance {}: empty mask_file", inst.instance_id)));
        }
    }
    Ok(())
}

pub fn parse_manifest(path: &Path, text: &str) -> Result<MaskManifest> {
    let manifest: MaskManifest = serde_json::from_str(text).map_err(|e| invalid(path, e))?;
    validate_manifest(path, &manifest)?;
    Ok(manifest)
}

/// Reads and fully validates a manifest and its mask files.
pub fn read_mask_frame(path: &Path) -> Result<MaskFrame> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest = parse_manifest(path, &text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut masks = Vec::with_capacity(manifest.instances.len());
    for inst in &manifest.instances {
        let mask_path = base.join(&inst.mask_file);
        if !mask_path.is_file() {
            return Err(invalid(path, format!("instance {}: missing mask file {}", inst.instance_id, mask_path.display())));
        }
        let mask = read_mask_png(&mask_path)?;
        if mask.dims() != (manifest.width, manifest.height) {
            return Err(invalid(
                path,
                format!("instance {}: mask is {:?}, frame is {}x{}", inst.instance_id, mask.dims(), manifest.width, manifest.height),
            ));
        }
        let tight = mask.tight_bbox();
        if tight != inst.bbox {
            return Err(invalid(
                path,
                format!("instance {}: bbox {:?} is not the tight box {:?}", inst.instance_id, inst.bbox, tight),
            ));
        }
        masks.push(SegmentMask { instance_id: inst.instance_id, label: inst.label.clone(), score: inst.score, bbox: tight, mask });
    }
    Ok(MaskFrame { frame_id: manifest.frame_id, width: manifest.width, height: manifest.height, masks })
}

/// Writes `masks/<instance_id>.png` files and `manifest.json` under `dir`.
/// Returns the manifest path.
pub fn write_mask_frame(dir: &Path, frame_id: &str, masks: &[SegmentMask]) -> Result<PathBuf> {
    let mask_dir = dir.join("masks");
    fs::create_dir_all(&mask_dir).map_err(|e| Error::io(&mask_dir, e))?;
    let (width, height) = match masks.first() {
        Some(m) => m.mask.dims(),
        None => return Err(Error::Manifest("cannot infer frame size without masks; use write_manifest".into())),
    };
    let mut instances = Vec::with_capacity(masks.len());
    for m in masks {
        let file = format!("masks/{}.png", m.instance_id);
        write_png(&dir.join(&file), &mask_to_image(&m.mask))?;
        instances.push(ManifestInstance {
            instance_id: m.instance_id,
            label: m.label.clone(),
            score: m.score,
            bbox: m.mask.tight_bbox(),
            mask_file: file,
        });
    }
    let manifest = MaskManifest { frame_id: frame_id.to_owned(), width, height, instances };
    write_manifest(dir, &manifest)
}

/// Writes `manifest.json` under `dir` and returns its path.
pub fn write_manifest(dir: &Path, manifest: &MaskManifest) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}
