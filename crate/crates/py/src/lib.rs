//! Python bindings for the branchdepth pipeline.
//!
//! Images are 8-bit row-major buffers passed as `bytes`; maps come back as
//! flat lists of floats. Heavy calls release the GIL.

use std::path::PathBuf;

use branchdepth::fusion::{BranchEstimate as CoreEstimate, Exclusion};
use branchdepth::io::{read_depth_pfm, read_disparity_pfm, read_png, write_depth_pfm, write_disparity_pfm, write_png};
use branchdepth::manifest::read_mask_frame;
use branchdepth::metrics::{self, DepthPair, EvalPair, IouMode};
use branchdepth::pipeline::{self, PipelineParams as CoreParams};
use branchdepth::synthgen::{self, SceneSpec};
use branchdepth::{BinaryMask, SegmentMask};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

create_exception!(branchdepth_py, BranchDepthError, PyException, "Raised when a pipeline operation fails.");

fn err(e: branchdepth::Error) -> PyErr {
    BranchDepthError::new_err(e.to_string())
}

fn iou_mode(mode: &str) -> PyResult<IouMode> {
    match mode {
        "box" => Ok(IouMode::Box),
        "mask" => Ok(IouMode::Mask),
        other => Err(PyValueError::new_err(format!("mode must be 'box' or 'mask', got '{other}'"))),
    }
}

/// Rectified pinhole stereo calibration.
#[pyclass(module = "branchdepth_py", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct CameraCalibration(branchdepth::CameraCalibration);

#[pymethods]
impl CameraCalibration {
    #[new]
    fn new(fx: f64, fy: f64, cx: f64, cy: f64, baseline: f64, width: usize, height: usize) -> PyResult<Self> {
        branchdepth::CameraCalibration::new(fx, fy, cx, cy, baseline, width, height).map(Self).map_err(err)
    }

    /// Square pixels with the principal point at the image center.
    #[staticmethod]
    fn centered(focal: f64, baseline: f64, width: usize, height: usize) -> PyResult<Self> {
        branchdepth::CameraCalibration::centered(focal, baseline, width, height).map(Self).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        branchdepth::io::read_calibration(&path).map(Self).map_err(err)
    }

    #[getter]
    fn fx(&self) -> f64 {
        self.0.fx
    }
    #[getter]
    fn fy(&self) -> f64 {
        self.0.fy
    }
    #[getter]
    fn cx(&self) -> f64 {
        self.0.cx
    }
    #[getter]
    fn cy(&self) -> f64 {
        self.0.cy
    }
    #[getter]
    fn baseline(&self) -> f64 {
        self.0.baseline
    }
    #[getter]
    fn width(&self) -> usize {
        self.0.width
    }
    #[getter]
    fn height(&self) -> usize {
        self.0.height
    }

    fn disparity_to_depth(&self, disparity: f64) -> PyResult<f64> {
        branchdepth::disparity_to_depth(disparity, &self.0).map_err(err)
    }

    fn depth_to_disparity(&self, depth: f64) -> PyResult<f64> {
        branchdepth::depth_to_disparity(depth, &self.0).map_err(err)
    }

    /// Camera-frame point `(x, y, z)` of pixel `(u, v)` at depth `z`.
    fn back_project(&self, u: f64, v: f64, z: f64) -> PyResult<(f64, f64, f64)> {
        let p = branchdepth::back_project(u, v, z, &self.0).map_err(err)?;
        Ok((p.x, p.y, p.z))
    }

    fn __repr__(&self) -> String {
        let c = &self.0;
        format!(
            "CameraCalibration(fx={}, fy={}, cx={}, cy={}, baseline={}, width={}, height={})",
            c.fx, c.fy, c.cx, c.cy, c.baseline, c.width, c.height
        )
    }
}

/// 8-bit image with 1, 3 or 4 interleaved channels.
#[pyclass(module = "branchdepth_py", frozen, from_py_object)]
#[derive(Clone)]
struct Image(branchdepth::ImageBuffer);

#[pymethods]
impl Image {
    #[new]
    #[pyo3(signature = (width, height, data, channels = 1))]
    fn new(width: usize, height: usize, data: &[u8], channels: usize) -> PyResult<Self> {
        branchdepth::ImageBuffer::new(width, height, channels, data.to_vec()).map(Self).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        read_png(&path).map(Self).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        write_png(&path, &self.0).map_err(err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }
    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }
    #[getter]
    fn channels(&self) -> usize {
        self.0.channels()
    }

    /// Raw samples, row-major with interleaved channels.
    #[getter]
    fn data<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.0.samples())
    }
}

/// Dense disparity in pixels; invalid pixels hold `DisparityMap.INVALID`.
#[pyclass(module = "branchdepth_py", frozen, from_py_object)]
#[derive(Clone)]
struct DisparityMap(branchdepth::DisparityMap);

#[pymethods]
impl DisparityMap {
    #[classattr]
    const INVALID: f32 = branchdepth::DisparityMap::INVALID;

    #[new]
    fn new(width: usize, height: usize, values: Vec<f32>) -> PyResult<Self> {
        branchdepth::DisparityMap::new(width, height, values).map(Self).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        read_disparity_pfm(&path).map(Self).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        write_disparity_pfm(&path, &self.0).map_err(err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }
    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    fn get(&self, u: usize, v: usize) -> PyResult<f32> {
        check_bounds(u, v, self.0.dims())?;
        Ok(self.0.get(u, v))
    }

    fn is_valid(&self, u: usize, v: usize) -> PyResult<bool> {
        check_bounds(u, v, self.0.dims())?;
        Ok(self.0.is_valid(u, v))
    }

    fn valid_count(&self) -> usize {
        self.0.valid_count()
    }

    /// Row-major values.
    fn values(&self) -> Vec<f32> {
        self.0.values().to_vec()
    }

    fn to_depth(&self, calib: &CameraCalibration) -> PyResult<DepthMap> {
        branchdepth::disparity_map_to_depth_map(&self.0, &calib.0).map(DepthMap).map_err(err)
    }
}

/// Dense depth in meters; invalid pixels are NaN.
#[pyclass(module = "branchdepth_py", frozen)]
struct DepthMap(branchdepth::DepthMap);

#[pymethods]
impl DepthMap {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        read_depth_pfm(&path).map(Self).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        write_depth_pfm(&path, &self.0).map_err(err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }
    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    fn get(&self, u: usize, v: usize) -> PyResult<f32> {
        check_bounds(u, v, self.0.dims())?;
        Ok(self.0.get(u, v))
    }

    fn values(&self) -> Vec<f32> {
        self.0.values().to_vec()
    }
}

fn check_bounds(u: usize, v: usize, (w, h): (usize, usize)) -> PyResult<()> {
    if u < w && v < h {
        Ok(())
    } else {
        Err(PyValueError::new_err(format!("pixel ({u}, {v}) outside {w}x{h}")))
    }
}

/// Instance segmentation mask with identity and detector score.
#[pyclass(module = "branchdepth_py", frozen, from_py_object)]
#[derive(Clone)]
struct Mask(SegmentMask);

#[pymethods]
impl Mask {
    /// `data` holds one byte per pixel, nonzero meaning foreground.
    #[new]
    #[pyo3(signature = (instance_id, width, height, data, label = "branch".to_string(), score = 1.0))]
    fn new(instance_id: u32, width: usize, height: usize, data: &[u8], label: String, score: f64) -> PyResult<Self> {
        let mask = BinaryMask::new(width, height, data.iter().map(|&b| b != 0).collect()).map_err(err)?;
        Ok(Self(SegmentMask::new(instance_id, label, score, mask)))
    }

    #[getter]
    fn instance_id(&self) -> u32 {
        self.0.instance_id
    }
    #[getter]
    fn label(&self) -> &str {
        &self.0.label
    }
    #[getter]
    fn score(&self) -> f64 {
        self.0.score
    }
    #[getter]
    fn width(&self) -> usize {
        self.0.mask.width()
    }
    #[getter]
    fn height(&self) -> usize {
        self.0.mask.height()
    }

    fn pixel_count(&self) -> usize {
        self.0.pixel_count()
    }

    /// `(x_min, y_min, x_max, y_max)`.
    #[getter]
    fn bbox(&self) -> (f64, f64, f64, f64) {
        let b = &self.0.bbox;
        (b.x_min, b.y_min, b.x_max, b.y_max)
    }

    /// One byte per pixel, 1 for foreground.
    #[getter]
    fn data<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        let bytes: Vec<u8> = self.0.mask.bits().iter().map(|&b| b as u8).collect();
        PyBytes::new(py, &bytes)
    }
}

/// Loads the masks listed in a manifest; returns `(frame_id, masks)`.
#[pyfunction]
fn load_manifest(path: PathBuf) -> PyResult<(String, Vec<Mask>)> {
    let frame = read_mask_frame(&path).map_err(err)?;
    Ok((frame.frame_id, frame.masks.into_iter().map(Mask).collect()))
}

/// Pipeline settings; defaults enable WLS refinement.
#[pyclass(module = "branchdepth_py", from_py_object)]
#[derive(Clone, Copy)]
struct PipelineParams(CoreParams);

#[pymethods]
impl PipelineParams {
    #[new]
    fn new() -> Self {
        Self(CoreParams::with_defaults())
    }

    #[getter]
    fn num_disparities(&self) -> usize {
        self.0.sgbm.num_disparities
    }
    #[setter]
    fn set_num_disparities(&mut self, v: usize) {
        self.0.sgbm.num_disparities = v;
    }
    #[getter]
    fn block_size(&self) -> usize {
        self.0.sgbm.block_size
    }
    #[setter]
    fn set_block_size(&mut self, v: usize) {
        self.0.sgbm.block_size = v;
    }
    #[getter]
    fn p1(&self) -> u32 {
        self.0.sgbm.p1
    }
    #[setter]
    fn set_p1(&mut self, v: u32) {
        self.0.sgbm.p1 = v;
    }
    #[getter]
    fn p2(&self) -> u32 {
        self.0.sgbm.p2
    }
    #[setter]
    fn set_p2(&mut self, v: u32) {
        self.0.sgbm.p2 = v;
    }
    #[getter]
    fn num_paths(&self) -> usize {
        self.0.sgbm.num_paths
    }
    #[setter]
    fn set_num_paths(&mut self, v: usize) {
        self.0.sgbm.num_paths = v;
    }
    #[getter]
    fn lr_check(&self) -> bool {
        self.0.sgbm.lr_check
    }
    #[setter]
    fn set_lr_check(&mut self, v: bool) {
        self.0.sgbm.lr_check = v;
    }
    #[getter]
    fn wls_enabled(&self) -> bool {
        self.0.wls_enabled
    }
    #[setter]
    fn set_wls_enabled(&mut self, v: bool) {
        self.0.wls_enabled = v;
    }
    #[getter]
    fn wls_lambda(&self) -> f64 {
        self.0.wls.lambda
    }
    #[setter]
    fn set_wls_lambda(&mut self, v: f64) {
        self.0.wls.lambda = v;
    }
    #[getter]
    fn wls_sigma_color(&self) -> f64 {
        self.0.wls.sigma_color
    }
    #[setter]
    fn set_wls_sigma_color(&mut self, v: f64) {
        self.0.wls.sigma_color = v;
    }
    #[getter]
    fn wls_iterations(&self) -> usize {
        self.0.wls.iterations
    }
    #[setter]
    fn set_wls_iterations(&mut self, v: usize) {
        self.0.wls.iterations = v;
    }
    #[getter]
    fn min_valid_ratio(&self) -> f64 {
        self.0.fusion.min_valid_ratio
    }
    #[setter]
    fn set_min_valid_ratio(&mut self, v: f64) {
        self.0.fusion.min_valid_ratio = v;
    }
}

/// Per-branch depth summary.
#[pyclass(module = "branchdepth_py", frozen, get_all)]
struct BranchEstimate {
    instance_id: u32,
    label: String,
    score: f64,
    pixel_count: usize,
    valid_count: usize,
    outlier_count: usize,
    valid_ratio: f64,
    mean_depth: f64,
    median_depth: f64,
    std_depth: f64,
    /// Camera-frame `(x, y, z)` in meters.
    centroid: (f64, f64, f64),
}

impl From<CoreEstimate> for BranchEstimate {
    fn from(e: CoreEstimate) -> Self {
        Self {
            instance_id: e.instance_id,
            label: e.label,
            score: e.score,
            pixel_count: e.pixel_count,
            valid_count: e.valid_count,
            outlier_count: e.outlier_count,
            valid_ratio: e.valid_ratio,
            mean_depth: e.mean_depth,
            median_depth: e.median_depth,
            std_depth: e.std_depth,
            centroid: (e.centroid.x, e.centroid.y, e.centroid.z),
        }
    }
}

#[pymethods]
impl BranchEstimate {
    fn __repr__(&self) -> String {
        format!("BranchEstimate(instance_id={}, median_depth={:.4})", self.instance_id, self.median_depth)
    }
}

fn frame(left: &Image, right: &Image, calib: &CameraCalibration) -> PyResult<branchdepth::StereoFrame> {
    branchdepth::StereoFrame::new(left.0.clone(), right.0.clone(), calib.0).map_err(err)
}

/// Returns `(raw, refined)` disparity maps.
#[pyfunction]
#[pyo3(signature = (left, right, calib, params = None))]
fn compute_disparity(
    py: Python<'_>,
    left: &Image,
    right: &Image,
    calib: &CameraCalibration,
    params: Option<PipelineParams>,
) -> PyResult<(DisparityMap, DisparityMap)> {
    let frame = frame(left, right, calib)?;
    let params = params.map_or_else(CoreParams::with_defaults, |p| p.0);
    let result = py.detach(|| pipeline::compute_disparity(&frame, &params)).map_err(err)?;
    Ok((DisparityMap(result.raw), DisparityMap(result.refined)))
}

type Localization = (Vec<BranchEstimate>, Vec<(u32, String)>);

/// Runs the full pipeline; returns `(estimates, exclusions)` where each
/// exclusion is `(instance_id, reason)`.
#[pyfunction]
#[pyo3(signature = (left, right, calib, masks, params = None))]
fn localize(
    py: Python<'_>,
    left: &Image,
    right: &Image,
    calib: &CameraCalibration,
    masks: Vec<Mask>,
    params: Option<PipelineParams>,
) -> PyResult<Localization> {
    let frame = frame(left, right, calib)?;
    let masks: Vec<SegmentMask> = masks.into_iter().map(|m| m.0).collect();
    let params = params.map_or_else(CoreParams::with_defaults, |p| p.0);
    let out = py.detach(|| pipeline::localize_frame(&frame, &masks, &params)).map_err(err)?;
    let loc = out.localization;
    Ok((
        loc.estimates.into_iter().map(BranchEstimate::from).collect(),
        loc.exclusions.into_iter().map(|Exclusion { instance_id, reason }| (instance_id, reason)).collect(),
    ))
}

/// Synthetic stereo pair with exact ground truth.
#[pyclass(module = "branchdepth_py", frozen, get_all)]
struct SyntheticScene {
    left: Image,
    right: Image,
    calibration: CameraCalibration,
    gt_disparity: DisparityMap,
    masks: Vec<Mask>,
    branch_depths: Vec<f64>,
}

/// Renders a scene from its JSON description.
#[pyfunction]
fn render_scene(py: Python<'_>, spec_json: &str) -> PyResult<SyntheticScene> {
    let spec: SceneSpec =
        serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(format!("scene spec: {e}")))?;
    let scene = py.detach(|| synthgen::render_scene(&spec)).map_err(err)?;
    Ok(SyntheticScene {
        left: Image(scene.frame.left),
        right: Image(scene.frame.right),
        calibration: CameraCalibration(scene.frame.calibration),
        gt_disparity: DisparityMap(scene.gt_disparity),
        masks: scene.masks.into_iter().map(Mask).collect(),
        branch_depths: scene.branch_depths,
    })
}

/// JSON scene descriptions with one centered branch per requested depth.
#[pyfunction]
fn range_protocol(calib: &CameraCalibration, depths: Vec<f64>) -> PyResult<Vec<String>> {
    let specs = synthgen::range_protocol(&calib.0, &depths).map_err(err)?;
    Ok(specs.iter().map(|s| serde_json::to_string(s).expect("scene specs serialize")).collect())
}

/// Average precision at one IoU threshold; `mode` is "box" or "mask".
#[pyfunction]
#[pyo3(signature = (predictions, ground_truth, iou_threshold, mode = "mask"))]
fn average_precision(
    predictions: Vec<Mask>,
    ground_truth: Vec<Mask>,
    iou_threshold: f64,
    mode: &str,
) -> PyResult<f64> {
    let pair = eval_pair(predictions, ground_truth);
    metrics::average_precision(&pair, iou_threshold, iou_mode(mode)?).map_err(err)
}

/// Mean AP over IoU thresholds 0.50 to 0.95.
#[pyfunction]
#[pyo3(signature = (predictions, ground_truth, mode = "mask"))]
fn map_50_95(predictions: Vec<Mask>, ground_truth: Vec<Mask>, mode: &str) -> PyResult<f64> {
    let pair = eval_pair(predictions, ground_truth);
    metrics::map_50_95(&pair, iou_mode(mode)?).map_err(err)
}

fn eval_pair(predictions: Vec<Mask>, ground_truth: Vec<Mask>) -> EvalPair {
    EvalPair {
        predictions: predictions.into_iter().map(|m| m.0).collect(),
        ground_truth: ground_truth.into_iter().map(|m| m.0).collect(),
    }
}

/// Root-mean-square error over `(estimate, ground_truth)` pairs.
#[pyfunction]
fn rmse(pairs: Vec<(f64, f64)>) -> PyResult<f64> {
    let pairs: Vec<DepthPair> =
        pairs.into_iter().map(|(estimate, ground_truth)| DepthPair { estimate, ground_truth }).collect();
    metrics::rmse(&pairs).map_err(err)
}

#[pymodule]
fn branchdepth_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BranchDepthError", m.py().get_type::<BranchDepthError>())?;
    m.add_class::<CameraCalibration>()?;
    m.add_class::<Image>()?;
    m.add_class::<DisparityMap>()?;
    m.add_class::<DepthMap>()?;
    m.add_class::<Mask>()?;
    m.add_class::<PipelineParams>()?;
    m.add_class::<BranchEstimate>()?;
    m.add_class::<SyntheticScene>()?;
    m.add_function(wrap_pyfunction!(load_manifest, m)?)?;
    m.add_function(wrap_pyfunction!(compute_disparity, m)?)?;
    m.add_function(wrap_pyfunction!(localize, m)?)?;
    m.add_function(wrap_pyfunction!(render_scene, m)?)?;
    m.add_function(wrap_pyfunction!(range_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(average_precision, m)?)?;
    m.add_function(wrap_pyfunction!(map_50_95, m)?)?;
    m.add_function(wrap_pyfunction!(rmse, m)?)?;
    Ok(())
}
