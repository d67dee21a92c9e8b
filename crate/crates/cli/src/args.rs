use std::path::PathBuf;

use cam_edit_core::config::{ConfigFile, CONFIG_ENV};
use cam_edit_core::eval::{NoiseKind, NoiseSpec};
use cam_edit_core::gradient::Inflection;
use cam_edit_core::refine::MorphOrder;
use cam_edit_core::stats::FisherMode;
use cam_edit_core::{PipelineConfig, RandomSeed};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cam-edit", version, about = "Edge detection with channel attention and independence testing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect edges in one image.
    Detect(DetectArgs),
    /// Score a predicted edge map against ground truth.
    Eval(EvalArgs),
    /// Write a noisy copy of an image.
    Noise(NoiseArgs),
    /// Run a detector over a corpus and report per-image and mean scores.
    Bench(BenchArgs),
    /// Score one image over median kernels 1, 3, 5 and 7.
    SweepMedian(SweepArgs),
    /// Write the synthetic benchmark corpus.
    MakeCorpus(MakeCorpusArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StartStage {
    Fused,
    Magnitude,
    Membership,
    PreEdit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Detector {
    CamEdit,
    Sobel,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Treat `--input` as a dumped intermediate and resume from it.
    #[arg(long, value_enum)]
    pub start_stage: Option<StartStage>,
    /// Directory for fused, magnitude, membership, pre-edit and post-edit dumps.
    #[arg(long)]
    pub dump_intermediate: Option<PathBuf>,
    /// Tab-separated per-window test results.
    #[arg(long)]
    pub dump_decisions: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth edge map. Without it MSE/PSNR are taken against `--input`.
    #[arg(long, required_unless_present = "input")]
    pub gt: Option<PathBuf>,
    /// Original image, used only when no ground truth is given.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    pub tolerance: f64,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_parser = parse_noise_kind)]
    pub noise: NoiseKind,
    #[arg(long)]
    pub noise_level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of `<name>.ppm` + `<name>.gt.pgm` pairs. Defaults to the
    /// built-in synthetic corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "cam-edit")]
    pub detector: Detector,
    /// Magnitude threshold of the Sobel detector.
    #[arg(long, default_value_t = cam_edit_core::eval::bench::BASELINE_THRESHOLD)]
    pub baseline_threshold: f64,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct MakeCorpusArgs {
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = cam_edit_core::synth::CORPUS_SEED.0)]
    pub seed: u64,
}

/// Detector tunables. Values here override the config file, which
/// overrides the built-in defaults.
#[derive(Debug, Default, Args)]
pub struct PipelineArgs {
    /// Config file (flat TOML, keys named like these flags). Falls back to
    /// the path in `CAM_EDIT_CONFIG`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Skip channel attention; use the luma of the input instead.
    #[arg(long)]
    pub no_cam: bool,
    #[arg(long)]
    pub no_edit: bool,
    /// Same as `--median-kernel 1`.
    #[arg(long)]
    pub no_median: bool,
    #[arg(long)]
    pub k_steepness: Option<f64>,
    /// `median`, `mean`, or a number.
    #[arg(long, value_parser = parse_inflection)]
    pub x0: Option<Inflection>,
    #[arg(long)]
    pub median_kernel: Option<usize>,
    #[arg(long)]
    pub binarize_threshold: Option<f64>,
    #[arg(long, value_parser = parse_morph)]
    pub morph_order: Option<MorphOrder>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Displacement limit of the contingency table.
    #[arg(long)]
    pub k_displacement: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub min_points: Option<usize>,
    #[arg(long, value_parser = parse_fisher)]
    pub fisher_mode: Option<FisherMode>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_parser = parse_noise_kind)]
    pub noise: Option<NoiseKind>,
    #[arg(long)]
    pub noise_level: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_inflection(s: &str) -> Result<Inflection, String> {
    s.parse().map_err(|e: cam_edit_core::Error| e.to_string())
}

fn parse_morph(s: &str) -> Result<MorphOrder, String> {
    s.parse().map_err(|e: cam_edit_core::Error| e.to_string())
}

fn parse_fisher(s: &str) -> Result<FisherMode, String> {
    s.parse().map_err(|e: cam_edit_core::Error| e.to_string())
}

fn parse_noise_kind(s: &str) -> Result<NoiseKind, String> {
    s.parse().map_err(|e: cam_edit_core::Error| e.to_string())
}

impl PipelineArgs {
    pub fn resolve(&self) -> cam_edit_core::Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        let path = self
            .config
            .clone()
            .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
        if let Some(path) = path {
            ConfigFile::load(path)?.apply(&mut cfg)?;
        }
        if self.no_cam {
            cfg.cam_enabled = false;
        }
        if self.no_edit {
            cfg.edit_enabled = false;
        }
        if let Some(v) = self.k_steepness {
            cfg.membership.k = v;
        }
        if let Some(v) = self.x0 {
            cfg.membership.x0 = v;
        }
        if let Some(v) = self.median_kernel {
            cfg.refine.median_kernel = v;
        }
        if self.no_median {
            cfg.refine.median_kernel = 1;
        }
        if let Some(v) = self.binarize_threshold {
            cfg.refine.binarize_threshold = v;
        }
        if let Some(v) = self.morph_order {
            cfg.refine.morph_order = v;
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
        if let Some(v) = self.fisher_mode {
            cfg.edit.fisher_mode = v;
        }
        if let Some(v) = self.tolerance {
            cfg.tolerance = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = RandomSeed(v);
            if let Some(n) = cfg.noise.as_mut() {
                n.seed = cfg.seed;
            }
        }
        match (self.noise, self.noise_level) {
            (Some(kind), level) => {
                let level = level.or(cfg.noise.map(|n| n.level)).unwrap_or(0.0);
                cfg.noise = Some(NoiseSpec { kind, level, seed: cfg.seed });
            }
            (None, Some(level)) => match cfg.noise.as_mut() {
                Some(n) => n.level = level,
                None => {
                    return Err(cam_edit_core::Error::Config("--noise-level needs --noise".into()));
                }
            },
            (None, None) => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
