//! Subcommands and their argument definitions.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use branchdepth::io::{
    read_calibration, read_disparity_pfm, read_png, write_atomic, write_calibration, write_depth_pfm,
    write_disparity_pfm, write_png,
};
use branchdepth::manifest::{read_mask_frame, write_manifest, write_mask_frame, MaskFrame, MaskManifest};
use branchdepth::metrics::{ap_per_threshold, iou_thresholds, map_50_95, rmse, DepthPair, EvalPair, IouMode};
use branchdepth::pipeline::{compute_disparity, localize_frame};
use branchdepth::preprocess::to_grayscale;
use branchdepth::synthgen::{range_protocol, render_scene, BranchSpec, SceneSpec, RANGE_SEED};
use branchdepth::{disparity_map_to_depth_map, CameraCalibration, StereoFrame};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{CliError, ExitCode};
use crate::render::{render_depth, render_disparity, render_overlay, OverlayItem};

#[derive(Debug, Parser)]
#[command(name = "branchdepth", version, about = "Stereo depth and branch localization pipeline")]
pub struct Cli {
    /// TOML pipeline configuration.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Seed for synthetic texture and noise.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic stereo scene with ground truth.
    Synth(SynthArgs),
    /// Compute raw and refined disparity maps.
    Disparity(DisparityArgs),
    /// Convert a disparity map to depth.
    Depth(DepthArgs),
    /// Localize masked branches in depth.
    Localize(LocalizeArgs),
    /// Evaluate predicted masks and depths against ground truth.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Three branches at 1.0, 1.5 and 2.0 m over a 4 m background.
    ThreeBranch,
    /// One centered branch at --depth, as in the range experiments.
    Range,
    /// Textured fronto-parallel plane at --depth.
    Uniform,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Scene description (JSON); overrides the preset and camera flags.
    #[arg(long, value_name = "FILE")]
    pub scene: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Preset::ThreeBranch)]
    pub preset: Preset,
    #[arg(long, default_value_t = 640)]
    pub width: usize,
    #[arg(long, default_value_t = 480)]
    pub height: usize,
    /// Focal length, pixels.
    #[arg(long, default_value_t = 700.0)]
    pub fx: f64,
    /// Baseline, meters.
    #[arg(long, default_value_t = 0.12)]
    pub baseline: f64,
    /// Branch depth (range) or plane depth (uniform), meters.
    #[arg(long)]
    pub depth: Option<f64>,
    /// Intensity noise standard deviation.
    #[arg(long, default_value_t = 2.0)]
    pub noise: f64,
    /// frame_id written to the mask manifest.
    #[arg(long, default_value = "frame")]
    pub frame_id: String,
}

/// Left/right images and calibration. `--input DIR` supplies
/// `DIR/left.png`, `DIR/right.png` and `DIR/calib.json`; explicit flags win.
#[derive(Debug, Args)]
pub struct FrameArgs {
    #[arg(long, value_name = "DIR")]
    pub input: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub left: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub right: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub calib: Option<PathBuf>,
}

/// Overrides for configuration keys.
#[derive(Debug, Default, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub num_disparities: Option<usize>,
    #[arg(long)]
    pub block_size: Option<usize>,
    #[arg(long)]
    pub p1: Option<u32>,
    #[arg(long)]
    pub p2: Option<u32>,
    /// Uniqueness ratio, percent.
    #[arg(long)]
    pub uniqueness: Option<u32>,
    #[arg(long)]
    pub speckle_window: Option<usize>,
    #[arg(long)]
    pub speckle_range: Option<f32>,
    /// Aggregation paths (4 or 8).
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub no_lr_check: bool,
    #[arg(long)]
    pub lr_max_diff: Option<f32>,
    /// Enable WLS refinement.
    #[arg(long, overrides_with = "no_wls")]
    pub wls: bool,
    /// Disable WLS refinement.
    #[arg(long, overrides_with = "wls")]
    pub no_wls: bool,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub sigma_color: Option<f64>,
    #[arg(long)]
    pub wls_iterations: Option<usize>,
    #[arg(long)]
    pub denoise_radius: Option<usize>,
    #[arg(long)]
    pub denoise_sigma: Option<f64>,
    #[arg(long)]
    pub no_equalize: bool,
    #[arg(long)]
    pub min_valid_ratio: Option<f64>,
}

impl PipelineArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        fn set<T: Copy>(dst: &mut T, src: Option<T>) {
            if let Some(v) = src {
                *dst = v;
            }
        }
        set(&mut cfg.sgbm.num_disparities, self.num_disparities);
        set(&mut cfg.sgbm.block_size, self.block_size);
        set(&mut cfg.sgbm.p1, self.p1);
        set(&mut cfg.sgbm.p2, self.p2);
        set(&mut cfg.sgbm.uniqueness_ratio, self.uniqueness);
        set(&mut cfg.sgbm.speckle_window, self.speckle_window);
        set(&mut cfg.sgbm.speckle_range, self.speckle_range);
        set(&mut cfg.sgbm.num_paths, self.paths);
        set(&mut cfg.sgbm.lr_max_diff, self.lr_max_diff);
        if self.no_lr_check {
            cfg.sgbm.lr_check = false;
        }
        if self.wls {
            cfg.wls.enabled = true;
        }
        if self.no_wls {
            cfg.wls.enabled = false;
        }
        set(&mut cfg.wls.lambda, self.lambda);
        set(&mut cfg.wls.sigma_color, self.sigma_color);
        set(&mut cfg.wls.iterations, self.wls_iterations);
        set(&mut cfg.preprocess.denoise_radius, self.denoise_radius);
        set(&mut cfg.preprocess.denoise_sigma, self.denoise_sigma);
        if self.no_equalize {
            cfg.preprocess.equalize = false;
        }
        set(&mut cfg.fusion.min_valid_ratio, self.min_valid_ratio);
    }
}

#[derive(Debug, Args)]
pub struct DisparityArgs {
    #[command(flatten)]
    pub frame: FrameArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    /// Disparity map (PFM).
    #[arg(long, value_name = "FILE")]
    pub disparity: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub calib: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LocalizeArgs {
    #[command(flatten)]
    pub frame: FrameArgs,
    /// Mask manifest (default: INPUT/manifest.json).
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted mask manifest.
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// Ground-truth mask manifest.
    #[arg(long, value_name = "FILE")]
    pub gt: PathBuf,
    /// CSV with header `estimate,ground_truth`, one depth pair per row, meters.
    #[arg(long, value_name = "FILE")]
    pub depth_pairs: Option<PathBuf>,
    /// Ascending depth boundaries for the RMSE buckets, e.g. 1.25,1.75.
    #[arg(long, value_delimiter = ',')]
    pub range_edges: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs the command on a thread pool of `--jobs` workers.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::new(ExitCode::Usage, "--jobs must be at least 1"));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Synth(args) => cmd_synth(args, &cfg, cli.seed),
        Command::Disparity(args) => {
            args.pipeline.apply(&mut cfg);
            cmd_disparity(args, &cfg)
        }
        Command::Depth(args) => cmd_depth(args, &cfg),
        Command::Localize(args) => {
            args.pipeline.apply(&mut cfg);
            cmd_localize(args, &cfg)
        }
        Command::Eval(args) => {
            if let Some(edges) = &args.range_edges {
                cfg.metrics.range_edges = edges.clone();
            }
            cmd_eval(args, &cfg)
        }
    })
}

fn output_dir(out: &Option<PathBuf>, cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    let dir = out
        .clone()
        .or_else(|| cfg.io.output_dir.clone())
        .ok_or_else(|| CliError::new(ExitCode::Usage, "no output directory: pass --out or set io.output_dir"))?;
    fs::create_dir_all(&dir).map_err(|e| CliError::output(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes()).map_err(CliError::output)
}

fn load_calibration(path: &Path) -> Result<CameraCalibration, CliError> {
    read_calibration(path).map_err(CliError::input)
}

fn calibration_path(explicit: &Option<PathBuf>, input: Option<&Path>, cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    explicit
        .clone()
        .or_else(|| input.map(|d| d.join("calib.json")))
        .or_else(|| cfg.calibration.clone())
        .ok_or_else(|| CliError::new(ExitCode::Usage, "no calibration: pass --calib, --input or set calibration"))
}

fn load_frame(args: &FrameArgs, cfg: &PipelineConfig) -> Result<StereoFrame, CliError> {
    let input = args.input.clone().or_else(|| cfg.io.input_dir.clone());
    let path = |explicit: &Option<PathBuf>, name: &str| {
        explicit
            .clone()
            .or_else(|| input.as_ref().map(|d| d.join(name)))
            .ok_or_else(|| CliError::new(ExitCode::Usage, format!("no {name}: pass --input or the file flag")))
    };
    let left = read_png(&path(&args.left, "left.png")?)?;
    let right = read_png(&path(&args.right, "right.png")?)?;
    let calib = load_calibration(&calibration_path(&args.calib, input.as_deref(), cfg)?)?;
    if left.dims() != right.dims() || left.dims() != (calib.width, calib.height) {
        return Err(CliError::new(
            ExitCode::Mismatch,
            format!(
                "left {:?}, right {:?} and calibration {}x{} must agree",
                left.dims(),
                right.dims(),
                calib.width,
                calib.height
            ),
        ));
    }
    Ok(StereoFrame::new(left, right, calib)?)
}

fn scaled_three_branch(calib: CameraCalibration, seed: u64, noise: f64) -> SceneSpec {
    let (sx, sy) = (calib.width as f64 / 320.0, calib.height as f64 / 240.0);
    let s = sx.min(sy);
    let branch = |u: f64, v: f64, radius: f64, angle: f64, length: f64, depth: f64| BranchSpec {
        center: [u * sx, v * sy],
        radius: radius * s,
        angle,
        length: length * s,
        depth,
    };
    SceneSpec {
        calib,
        background_depth: 4.0,
        branches: vec![
            branch(180.0, 70.0, 12.0, 30.0, 140.0, 1.0),
            branch(200.0, 150.0, 11.0, -50.0, 120.0, 1.5),
            branch(160.0, 200.0, 11.0, 5.0, 150.0, 2.0),
        ],
        texture_seed: seed,
        noise_sigma: noise,
    }
}

fn synth_spec(args: &SynthArgs, seed: Option<u64>) -> Result<SceneSpec, CliError> {
    if let Some(path) = &args.scene {
        let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let mut spec: SceneSpec =
            serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        if let Some(s) = seed {
            spec.texture_seed = s;
        }
        return Ok(spec);
    }
    let calib = CameraCalibration::centered(args.fx, args.baseline, args.width, args.height)?;
    let mut spec = match args.preset {
        Preset::ThreeBranch => scaled_three_branch(calib, 1, args.noise),
        Preset::Range => {
            let mut spec = range_protocol(&calib, &[args.depth.unwrap_or(1.0)])?.remove(0);
            spec.noise_sigma = args.noise;
            spec
        }
        Preset::Uniform => SceneSpec {
            calib,
            background_depth: args.depth.unwrap_or(calib.focal_baseline() / 32.0),
            branches: vec![],
            texture_seed: 1,
            noise_sigma: args.noise,
        },
    };
    if let Some(s) = seed {
        spec.texture_seed = s;
    } else if args.preset == Preset::Range {
        spec.texture_seed = RANGE_SEED;
    }
    Ok(spec)
}

/// Writes `left.png`, `right.png`, `calib.json`, `gt_disp.pfm`,
/// `gt_depth.pfm`, `gt_occlusion.png`, `masks/` with `manifest.json`, and
/// `scene.json`.
pub fn cmd_synth(args: &SynthArgs, cfg: &PipelineConfig, seed: Option<u64>) -> Result<(), CliError> {
    let spec = synth_spec(args, seed)?;
    let scene = render_scene(&spec)?;
    let out = output_dir(&args.out, cfg)?;
    let w = |r: branchdepth::Result<_>| r.map_err(CliError::output);
    w(write_png(&out.join("left.png"), &scene.frame.left))?;
    w(write_png(&out.join("right.png"), &scene.frame.right))?;
    w(write_calibration(&out.join("calib.json"), &spec.calib))?;
    w(write_disparity_pfm(&out.join("gt_disp.pfm"), &scene.gt_disparity))?;
    w(write_depth_pfm(&out.join("gt_depth.pfm"), &scene.gt_depth))?;
    w(write_png(&out.join("gt_occlusion.png"), &branchdepth::manifest::mask_to_image(&scene.occlusion)))?;
    if scene.masks.is_empty() {
        let manifest = MaskManifest {
            frame_id: args.frame_id.clone(),
            width: spec.calib.width,
            height: spec.calib.height,
            instances: vec![],
        };
        write_manifest(&out, &manifest).map_err(CliError::output)?;
    } else {
        write_mask_frame(&out, &args.frame_id, &scene.masks).map_err(CliError::output)?;
    }
    write_json(&out.join("scene.json"), &spec)
}

/// Writes `raw.pfm`, `refined.pfm` and their false-color renderings.
pub fn cmd_disparity(args: &DisparityArgs, cfg: &PipelineConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let frame = load_frame(&args.frame, cfg)?;
    let result = compute_disparity(&frame, &cfg.pipeline_params())?;
    let out = output_dir(&args.out, cfg)?;
    let w = |r: branchdepth::Result<_>| r.map_err(CliError::output);
    w(write_disparity_pfm(&out.join("raw.pfm"), &result.raw))?;
    w(write_disparity_pfm(&out.join("refined.pfm"), &result.refined))?;
    w(write_png(&out.join("raw.png"), &render_disparity(&result.raw)))?;
    w(write_png(&out.join("refined.png"), &render_disparity(&result.refined)))?;
    Ok(())
}

/// Writes `depth.pfm` and `depth.png`.
pub fn cmd_depth(args: &DepthArgs, cfg: &PipelineConfig) -> Result<(), CliError> {
    let disp = read_disparity_pfm(&args.disparity)?;
    let calib = load_calibration(&calibration_path(&args.calib, args.disparity.parent(), cfg)?)?;
    if disp.dims() != (calib.width, calib.height) {
        return Err(CliError::new(
            ExitCode::Mismatch,
            format!("disparity {:?} vs calibration {}x{}", disp.dims(), calib.width, calib.height),
        ));
    }
    let depth = disparity_map_to_depth_map(&disp, &calib)?;
    let out = output_dir(&args.out, cfg)?;
    write_depth_pfm(&out.join("depth.pfm"), &depth).map_err(CliError::output)?;
    write_png(&out.join("depth.png"), &render_depth(&depth)).map_err(CliError::output)
}

#[derive(Debug, Serialize)]
struct EstimatesReport<'a> {
    frame_id: &'a str,
    estimates: &'a [branchdepth::fusion::BranchEstimate],
    exclusions: &'a [branchdepth::fusion::Exclusion],
}

fn load_masks(path: &Path, dims: (usize, usize)) -> Result<MaskFrame, CliError> {
    if !path.is_file() {
        return Err(CliError::input(format!("{}: manifest not found", path.display())));
    }
    let frame = read_mask_frame(path)?;
    if (frame.width, frame.height) != dims {
        return Err(CliError::new(
            ExitCode::Mismatch,
            format!("{}: masks are {}x{}, frame is {}x{}", path.display(), frame.width, frame.height, dims.0, dims.1),
        ));
    }
    Ok(frame)
}

/// Writes `estimates.json` and `overlay.png`.
pub fn cmd_localize(args: &LocalizeArgs, cfg: &PipelineConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let frame = load_frame(&args.frame, cfg)?;
    let manifest_path = args
        .manifest
        .clone()
        .or_else(|| args.frame.input.clone().or_else(|| cfg.io.input_dir.clone()).map(|d| d.join("manifest.json")))
        .ok_or_else(|| CliError::new(ExitCode::Usage, "no manifest: pass --manifest or --input"))?;
    let masks = load_masks(&manifest_path, (frame.width(), frame.height()))?;
    let result = localize_frame(&frame, &masks.masks, &cfg.pipeline_params())?;
    let loc = &result.localization;
    let out = output_dir(&args.out, cfg)?;
    write_json(
        &out.join("estimates.json"),
        &EstimatesReport { frame_id: &masks.frame_id, estimates: &loc.estimates, exclusions: &loc.exclusions },
    )?;
    let items: Vec<OverlayItem> = masks
        .masks
        .iter()
        .map(|m| OverlayItem {
            mask: &m.mask,
            depth: loc.estimates.iter().find(|e| e.instance_id == m.instance_id).map(|e| e.median_depth),
        })
        .collect();
    let base = to_grayscale(&frame.left)?;
    write_png(&out.join("overlay.png"), &render_overlay(&base, &items)).map_err(CliError::output)
}

/// Reads `estimate,ground_truth` rows.
pub fn parse_depth_pairs(path: &Path, text: &str) -> Result<Vec<DepthPair>, CliError> {
    let bad = |line: usize, msg: &str| CliError::input(format!("{}:{line}: {msg}", path.display()));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim().replace(' ', "") == "estimate,ground_truth" => {}
        Some((i, _)) => return Err(bad(i + 1, "expected header 'estimate,ground_truth'")),
        None => return Err(bad(1, "empty file")),
    }
    lines
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [e, g] = fields[..] else { return Err(bad(i + 1, "expected two columns")) };
            let (estimate, ground_truth) = match (e.parse::<f64>(), g.parse::<f64>()) {
                (Ok(e), Ok(g)) => (e, g),
                _ => return Err(bad(i + 1, "unparsable number")),
            };
            if !estimate.is_finite() || !(ground_truth > 0.0 && ground_truth.is_finite()) {
                return Err(bad(i + 1, "depths must be finite and ground truth positive"));
            }
            Ok(DepthPair { estimate, ground_truth })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct ThresholdAp {
    iou: f64,
    ap_box: f64,
    ap_mask: f64,
}

#[derive(Debug, Serialize)]
struct RangeRmse {
    count: usize,
    rmse: Option<f64>,
}

#[derive(Debug, Serialize)]
struct EvalReport {
    frame_id: String,
    per_threshold_ap: Vec<ThresholdAp>,
    map_box: f64,
    map_mask: f64,
    rmse_by_range: BTreeMap<String, RangeRmse>,
}

fn range_label(edges: &[f64], bucket: usize) -> String {
    match (bucket.checked_sub(1).map(|i| edges[i]), edges.get(bucket)) {
        (None, Some(hi)) => format!("<{hi}"),
        (Some(lo), Some(hi)) => format!("{lo}-{hi}"),
        (Some(lo), None) => format!(">={lo}"),
        (None, None) => "all".to_owned(),
    }
}

fn rmse_by_range(pairs: &[DepthPair], edges: &[f64]) -> Result<BTreeMap<String, RangeRmse>, CliError> {
    let mut out = BTreeMap::new();
    if pairs.is_empty() {
        return Ok(out);
    }
    out.insert("all".to_owned(), RangeRmse { count: pairs.len(), rmse: Some(rmse(pairs)?) });
    if edges.is_empty() {
        return Ok(out);
    }
    for bucket in 0..=edges.len() {
        let members: Vec<DepthPair> = pairs
            .iter()
            .copied()
            .filter(|p| edges.iter().filter(|&&e| p.ground_truth >= e).count() == bucket)
            .collect();
        let value = if members.is_empty() { None } else { Some(rmse(&members)?) };
        out.insert(range_label(edges, bucket), RangeRmse { count: members.len(), rmse: value });
    }
    Ok(out)
}

/// Writes `report.json` and `report.csv`.
pub fn cmd_eval(args: &EvalArgs, cfg: &PipelineConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let read = |path: &Path| -> Result<MaskFrame, CliError> {
        if !path.is_file() {
            return Err(CliError::input(format!("{}: manifest not found", path.display())));
        }
        Ok(read_mask_frame(path)?)
    };
    let (pred, gt) = (read(&args.pred)?, read(&args.gt)?);
    if pred.frame_id != gt.frame_id {
        return Err(CliError::new(
            ExitCode::FrameMismatch,
            format!("prediction frame '{}' vs ground-truth frame '{}'", pred.frame_id, gt.frame_id),
        ));
    }
    if (pred.width, pred.height) != (gt.width, gt.height) {
        return Err(CliError::new(
            ExitCode::Mismatch,
            format!("prediction {}x{} vs ground truth {}x{}", pred.width, pred.height, gt.width, gt.height),
        ));
    }
    let pairs = match &args.depth_pairs {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            parse_depth_pairs(path, &text)?
        }
        None => vec![],
    };
    let frame_id = gt.frame_id.clone();
    let pair = EvalPair { predictions: pred.masks, ground_truth: gt.masks };
    let (ap_box, ap_mask) = (ap_per_threshold(&pair, IouMode::Box)?, ap_per_threshold(&pair, IouMode::Mask)?);
    let report = EvalReport {
        frame_id,
        per_threshold_ap: iou_thresholds()
            .iter()
            .enumerate()
            .map(|(i, &iou)| ThresholdAp { iou, ap_box: ap_box[i], ap_mask: ap_mask[i] })
            .collect(),
        map_box: map_50_95(&pair, IouMode::Box)?,
        map_mask: map_50_95(&pair, IouMode::Mask)?,
        rmse_by_range: rmse_by_range(&pairs, &cfg.metrics.range_edges)?,
    };
    let out = output_dir(&args.out, cfg)?;
    write_json(&out.join("report.json"), &report)?;
    let mut csv = String::from("metric,iou,range,count,value\n");
    for t in &report.per_threshold_ap {
        csv += &format!("ap_box,{:.2},,,{}\n", t.iou, t.ap_box);
        csv += &format!("ap_mask,{:.2},,,{}\n", t.iou, t.ap_mask);
    }
    csv += &format!("map_box,,,,{}\nmap_mask,,,,{}\n", report.map_box, report.map_mask);
    for (range, r) in &report.rmse_by_range {
        csv += &format!("rmse,,{range},{},{}\n", r.count, r.rmse.map_or(String::new(), |x| x.to_string()));
    }
    write_atomic(&out.join("report.csv"), csv.as_bytes()).map_err(CliError::output)
}
