//! Flat key-value configuration file.
//!
//! Keys mirror the CLI flags (`median-kernel = 5`, `alpha = 0.05`, ...).
//! Kernel overrides are nested numeric arrays. The file is parsed as TOML;
//! every key is optional and unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::eval::noise::{NoiseKind, NoiseSpec};
use crate::gradient::Inflection;
use crate::image::RandomSeed;
use crate::pipeline::PipelineConfig;
use crate::refine::MorphOrder;
use crate::stats::FisherMode;

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "CAM_EDIT_CONFIG";

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DepthwiseOverride {
    Shared([[f64; 3]; 3]),
    PerChannel(Vec<[[f64; 3]; 3]>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigFile {
    pub no_cam: Option<bool>,
    pub no_edit: Option<bool>,
    pub no_median: Option<bool>,
    pub depthwise_kernel: Option<DepthwiseOverride>,
    pub pointwise_kernel: Option<[[f64; 2]; 2]>,
    pub channel_mix: Option<Vec<Vec<f64>>>,
    pub k_steepness: Option<f64>,
    pub x0: Option<toml::Value>,
    pub median_kernel: Option<usize>,
    pub binarize_threshold: Option<f64>,
    pub morph_order: Option<String>,
    pub window: Option<usize>,
    pub stride: Option<usize>,
    pub k_displacement: Option<usize>,
    pub alpha: Option<f64>,
    pub min_points: Option<usize>,
    pub fisher_mode: Option<String>,
    pub tolerance: Option<f64>,
    pub noise: Option<String>,
    pub noise_level: Option<f64>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Overlays the values present in the file onto `cfg`.
    pub fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        if let Some(v) = self.no_cam {
            cfg.cam_enabled = !v;
        }
        if let Some(v) = self.no_edit {
            cfg.edit_enabled = !v;
        }
        if let Some(k) = &self.depthwise_kernel {
            cfg.cam_kernels.depthwise = match k {
                DepthwiseOverride::Shared(k) => vec![*k; 3],
                DepthwiseOverride::PerChannel(ks) => ks.clone(),
            };
        }
        if let Some(k) = self.pointwise_kernel {
            cfg.cam_kernels.pointwise = k;
        }
        if let Some(m) = &self.channel_mix {
            cfg.cam_kernels.mix = m.clone();
        }
        if let Some(k) = self.k_steepness {
            cfg.membership.k = k;
        }
        if let Some(x0) = &self.x0 {
            cfg.membership.x0 = match x0 {
                toml::Value::String(s) => s.parse()?,
                toml::Value::Float(f) => Inflection::Value(*f),
                toml::Value::Integer(i) => Inflection::Value(*i as f64),
                other => return Err(Error::Config(format!("x0: unexpected value {other}"))),
            };
        }
        if let Some(v) = self.median_kernel {
            cfg.refine.median_kernel = v;
        }
        if self.no_median == Some(true) {
            cfg.refine.median_kernel = 1;
        }
        if let Some(v) = self.binarize_threshold {
            cfg.refine.binarize_threshold = v;
        }
        if let Some(v) = &self.morph_order {
            cfg.refine.morph_order = v.parse::<MorphOrder>()?;
        }
        if let Some(v) = self.window {
            cfg.edit.window = v;
        }
        if let Some(v) = self.stride {
            cfg.edit.stride = v;
        }
        if let Some(v) = self.k_displacement {
            cfg.edit.k = v;
        }
        if let Some(v) = self.alpha {
            cfg.edit.alpha = v;
        }
        if let Some(v) = self.min_points {
            cfg.edit.min_points = v;
        }
        if let Some(v) = &self.fisher_mode {
            cfg.edit.fisher_mode = v.parse::<FisherMode>()?;
        }
        if let Some(v) = self.tolerance {
            cfg.tolerance = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = RandomSeed(v);
        }
        match (&self.noise, self.noise_level) {
            (Some(kind), level) => {
                cfg.noise = Some(NoiseSpec {
                    kind: kind.parse::<NoiseKind>()?,
                    level: level.unwrap_or(0.0),
                    seed: cfg.seed,
                });
            }
            (None, Some(level)) => {
                let spec = cfg
                    .noise
                    .as_mut()
                    .ok_or_else(|| Error::Config("noise-level given without noise".into()))?;
                spec.level = level;
            }
            (None, None) => {}
        }
        Ok(())
    }
}
