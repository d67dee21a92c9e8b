//! The full detector: attention fusion, gradients, membership, refinement,
//! independence filtering.

use serde::Serialize;

use crate::cam::{cam_extract, CamKernels, ChannelWeights};
use crate::edit::{combine, sweep_windows, EditConfig, WindowDecision};
use crate::error::{Error, Result};
use crate::eval::noise::NoiseSpec;
use crate::gradient::{membership, sobel, GradientField, MembershipConfig};
use crate::image::{to_grayscale, BinaryEdgeMap, ImagePlane, MultiChannelImage, RandomSeed};
use crate::refine::{refine, RefineConfig};

/// Every tunable of the detector and its evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub cam_enabled: bool,
    pub cam_kernels: CamKernels,
    pub membership: MembershipConfig,
    pub refine: RefineConfig,
    pub edit_enabled: bool,
    pub edit: EditConfig,
    /// Matching tolerance in pixels for precision/recall.
    pub tolerance: f64,
    pub noise: Option<NoiseSpec>,
    pub seed: RandomSeed,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            cam_enabled: true,
            cam_kernels: CamKernels::default(),
            membership: MembershipConfig::default(),
            refine: RefineConfig::default(),
            edit_enabled: true,
            edit: EditConfig::default(),
            tolerance: 2.0,
            noise: None,
            seed: RandomSeed::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.cam_kernels.validate(3)?;
        self.membership.validate()?;
        self.refine.validate()?;
        self.edit.validate()?;
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid("tolerance", format!("must be >= 0, got {}", self.tolerance)));
        }
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        Ok(())
    }

    /// Median filter disabled (kernel 1).
    pub fn without_median(mut self) -> Self {
        self.refine.median_kernel = 1;
        self
    }

    pub fn without_edit(mut self) -> Self {
        self.edit_enabled = false;
        self
    }

    pub fn without_cam(mut self) -> Self {
        self.cam_enabled = false;
        self
    }
}

/// Intermediate results of one detector run.
#[derive(Debug, Clone)]
pub struct Stages {
    pub fused: ImagePlane,
    pub weights: Option<ChannelWeights>,
    pub gradient: GradientField,
    pub membership: ImagePlane,
    pub pre_edit: BinaryEdgeMap,
    pub decisions: Vec<WindowDecision>,
    pub edges: BinaryEdgeMap,
}

/// The plane fed to the gradient stage. Single-channel input goes through
/// the attention stage as three identical channels, which reproduces it.
pub fn fused_plane(img: &MultiChannelImage, cfg: &PipelineConfig) -> Result<(ImagePlane, Option<ChannelWeights>)> {
    if !cfg.cam_enabled {
        return Ok((to_grayscale(img).map_err(|e| e.in_stage("grayscale"))?, None));
    }
    let rgb = match img.channel_count() {
        3 => img.clone(),
        1 => {
            let g = img.channels()[0].clone();
            MultiChannelImage::new(vec![g.clone(), g.clone(), g])?
        }
        c => return Err(Error::UnsupportedChannels(c).in_stage("cam")),
    };
    let out = cam_extract(&rgb, &cfg.cam_kernels).map_err(|e| e.in_stage("cam"))?;
    Ok((out.fused, Some(out.weights)))
}

pub fn gradient_stage(fused: &ImagePlane) -> Result<GradientField> {
    sobel(fused).map_err(|e| e.in_stage("sobel"))
}

pub fn membership_stage(mag: &ImagePlane, cfg: &PipelineConfig) -> Result<ImagePlane> {
    membership(mag, &cfg.membership).map_err(|e| e.in_stage("membership"))
}

pub fn refine_stage(mu: &ImagePlane, cfg: &PipelineConfig) -> Result<BinaryEdgeMap> {
    refine(mu, &cfg.refine).map_err(|e| e.in_stage("refine"))
}

pub fn edit_stage(map: &BinaryEdgeMap, cfg: &PipelineConfig) -> Result<(BinaryEdgeMap, Vec<WindowDecision>)> {
    if !cfg.edit_enabled {
        return Ok((map.clone(), Vec::new()));
    }
    let decisions = sweep_windows(map, &cfg.edit).map_err(|e| e.in_stage("edit"))?;
    Ok((combine(map, &decisions), decisions))
}

/// Runs every stage from the pre-edit map onwards.
pub fn run_from_pre_edit(map: &BinaryEdgeMap, cfg: &PipelineConfig) -> Result<BinaryEdgeMap> {
    Ok(edit_stage(map, cfg)?.0)
}

pub fn run_from_membership(mu: &ImagePlane, cfg: &PipelineConfig) -> Result<BinaryEdgeMap> {
    run_from_pre_edit(&refine_stage(mu, cfg)?, cfg)
}

pub fn run_from_magnitude(mag: &ImagePlane, cfg: &PipelineConfig) -> Result<BinaryEdgeMap> {
    run_from_membership(&membership_stage(mag, cfg)?, cfg)
}

pub fn run_from_fused(fused: &ImagePlane, cfg: &PipelineConfig) -> Result<BinaryEdgeMap> {
    run_from_magnitude(&gradient_stage(fused)?.mag, cfg)
}

pub fn detect_staged(img: &MultiChannelImage, cfg: &PipelineConfig) -> Result<Stages> {
    cfg.validate()?;
    let (fused, weights) = fused_plane(img, cfg)?;
    let gradient = gradient_stage(&fused)?;
    let membership = membership_stage(&gradient.mag, cfg)?;
    let pre_edit = refine_stage(&membership, cfg)?;
    let (edges, decisions) = edit_stage(&pre_edit, cfg)?;
    Ok(Stages {
        fused,
        weights,
        gradient,
        membership,
        pre_edit,
        decisions,
        edges,
    })
}

pub fn detect(img: &MultiChannelImage, cfg: &PipelineConfig) -> Result<BinaryEdgeMap> {
    Ok(detect_staged(img, cfg)?.edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn black_image_has_no_edges() {
        let p = ImagePlane::filled(40, 30, 0.0).unwrap();
        let img = MultiChannelImage::new(vec![p.clone(), p.clone(), p]).unwrap();
        assert_eq!(detect(&img, &PipelineConfig::default()).unwrap().count(), 0);
    }

    #[test]
    fn stage_errors_are_labelled() {
        let p = ImagePlane::filled(2, 2, 0.0).unwrap();
        let img = MultiChannelImage::new(vec![p.clone(), p.clone(), p]).unwrap();
        let err = detect(&img, &PipelineConfig::default()).unwrap_err();
        assert!(err.to_string().starts_with("sobel:"), "{err}");
    }

    #[test]
    fn gray_input_matches_disabled_cam_on_replicated_channels() {
        let g = ImagePlane::from_fn(30, 30, |x, y| if x + y > 30 { 0.9 } else { 0.1 }).unwrap();
        let gray = MultiChannelImage::from_gray(g.clone());
        let (fused, w) = fused_plane(&gray, &PipelineConfig::default()).unwrap();
        assert_eq!(w.unwrap().alpha.len(), 3);
        for (a, b) in fused.data().iter().zip(g.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = PipelineConfig::default();
        cfg.refine.median_kernel = 4;
        let p = ImagePlane::filled(8, 8, 0.0).unwrap();
        assert!(detect(&MultiChannelImage::from_gray(p), &cfg).is_err());
    }
}
