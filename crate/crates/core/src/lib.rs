//! Stereo depth estimation and instance-level 3D localization of tree branches.
//!
//! The pipeline runs preprocessing, semi-global block matching, WLS
//! refinement, triangulation and per-instance depth fusion. [`metrics`]
//! evaluates detections and depth against ground truth and [`synthgen`]
//! renders synthetic scenes with exact ground truth.

pub mod calib;
pub mod error;
pub mod fusion;
pub mod image;
pub mod io;
pub mod manifest;
pub mod maps;
pub mod mask;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod sgbm;
pub mod synthgen;
pub mod wls;

pub use calib::{back_project, depth_to_disparity, disparity_to_depth, CameraCalibration, Point3D};
pub use error::{Error, Result};
pub use image::{ImageBuffer, StereoFrame};
pub use maps::{disparity_map_to_depth_map, DepthMap, DisparityMap};
pub use mask::{BBox, BinaryMask, SegmentMask};
