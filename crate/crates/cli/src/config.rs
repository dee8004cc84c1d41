//! Pipeline configuration file (TOML). Unknown keys are rejected and missing
//! sections take their defaults.
//!
//! ```toml
//! calibration = "calib.json"
//!
//! [preprocess]
//! denoise_radius = 2
//! denoise_sigma = 1.0
//! equalize = true
//!
//! [sgbm]
//! num_disparities = 128
//! p1 = 600
//! p2 = 2400
//!
//! [wls]
//! enabled = true
//! lambda = 8000.0
//! sigma_color = 0.01
//! iterations = 25
//!
//! [fusion]
//! min_valid_ratio = 0.25
//!
//! [metrics]
//! range_edges = [1.25, 1.75]
//!
//! [io]
//! output_dir = "out"
//! ```

use std::path::{Path, PathBuf};

use branchdepth::fusion::FusionParams;
use branchdepth::pipeline::PipelineParams;
use branchdepth::preprocess::PreprocessConfig;
use branchdepth::sgbm::SgbmParams;
use branchdepth::wls::WlsParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WlsSection {
    pub enabled: bool,
    pub lambda: f64,
    pub sigma_color: f64,
    pub iterations: usize,
}

impl Default for WlsSection {
    fn default() -> Self {
        let p = WlsParams::default();
        Self { enabled: true, lambda: p.lambda, sigma_color: p.sigma_color, iterations: p.iterations }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Ascending ground-truth depth boundaries, meters, splitting the RMSE buckets.
    pub range_edges: Vec<f64>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { range_edges: vec![1.25, 1.75] }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    pub input_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub calibration: Option<PathBuf>,
    pub preprocess: PreprocessConfig,
    pub sgbm: SgbmParams,
    pub wls: WlsSection,
    pub fusion: FusionParams,
    pub metrics: MetricsConfig,
    pub io: IoConfig,
}

impl PipelineConfig {
    /// Parses `text`; relative paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(path) = p.as_mut() {
                if path.is_relative() {
                    *path = base_dir.join(&*path);
                }
            }
        };
        resolve(&mut cfg.calibration);
        resolve(&mut cfg.io.input_dir);
        resolve(&mut cfg.io.output_dir);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.sgbm.validate().map_err(CliError::from)?;
        self.wls_params().validate().map_err(CliError::from)?;
        let edges = &self.metrics.range_edges;
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::config("metrics.range_edges must be finite and strictly ascending"));
        }
        if !(0.0..=1.0).contains(&self.fusion.min_valid_ratio) {
            return Err(CliError::config("fusion.min_valid_ratio must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn wls_params(&self) -> WlsParams {
        WlsParams { lambda: self.wls.lambda, sigma_color: self.wls.sigma_color, iterations: self.wls.iterations }
    }

    pub fn pipeline_params(&self) -> PipelineParams {
        PipelineParams {
            preprocess: self.preprocess,
            sgbm: self.sgbm,
            wls: self.wls_params(),
            wls_enabled: self.wls.enabled,
            fusion: self.fusion,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let cfg = PipelineConfig::parse("", Path::new("/x")).unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        assert_eq!(cfg.pipeline_params(), PipelineParams::with_defaults());
    }

    #[test]
    fn partial_sections_and_relative_paths() {
        let cfg = PipelineConfig::parse(
            "calibration = \"c.json\"\n[sgbm]\np2 = 3000\n[wls]\nenabled = false\n",
            Path::new("/cfg"),
        )
        .unwrap();
        assert_eq!(cfg.calibration, Some(PathBuf::from("/cfg/c.json")));
        assert_eq!(cfg.sgbm.p2, 3000);
        assert_eq!(cfg.sgbm.p1, 600);
        assert!(!cfg.wls.enabled);
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in ["bogus = 1", "[sgbm]\nblock = 5", "[wls]\nsigma = 1.0", "[extra]\n"] {
            assert!(PipelineConfig::parse(text, Path::new(".")).is_err(), "{text}");
        }
    }

    #[test]
    fn invalid_values_rejected() {
        let cfg = PipelineConfig::parse("[metrics]\nrange_edges = [2.0, 1.0]", Path::new(".")).unwrap();
        assert!(cfg.validate().is_err());
        let cfg = PipelineConfig::parse("[sgbm]\np1 = 3000", Path::new(".")).unwrap();
        assert!(cfg.validate().is_err());
    }
}
