//! Edge detection by channel-attention fusion, sigmoid gradient membership,
//! median/morphological refinement and window-wise independence testing of
//! edge-pixel displacements.

pub mod cam;
pub mod config;
pub mod edit;
pub mod error;
pub mod eval;
pub mod filter;
pub mod gradient;
pub mod image;
pub mod io;
pub mod pipeline;
pub mod refine;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use image::{to_grayscale, BinaryEdgeMap, ImagePlane, MultiChannelImage, Pixel, PixelCoordSet, RandomSeed};
pub use pipeline::{detect, detect_staged, PipelineConfig, Stages};
