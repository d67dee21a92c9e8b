//! Coarse graining and morphological smoothing of the membership plane.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryEdgeMap, ImagePlane};

/// Order of the 3x3 morphology applied after binarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MorphOrder {
    /// Dilate, then erode.
    #[default]
    Close,
    /// Erode, then dilate.
    Open,
    None,
}

impl std::str::FromStr for MorphOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "close" => Ok(Self::Close),
            "open" => Ok(Self::Open),
            "none" => Ok(Self::None),
            other => Err(Error::invalid("morph-order", format!("expected close, open or none, got `{other}`"))),
        }
    }
}

impl std::fmt::Display for MorphOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MorphOrder::Close => "close",
            MorphOrder::Open => "open",
            MorphOrder::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    /// Odd median window size; 1 disables the filter.
    pub median_kernel: usize,
    pub binarize_threshold: f64,
    pub morph_order: MorphOrder,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            median_kernel: 5,
            binarize_threshold: 0.7,
            morph_order: MorphOrder::Close,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        check_median_size(self.median_kernel)?;
        if !(self.binarize_threshold > 0.0 && self.binarize_threshold < 1.0) {
            return Err(Error::invalid(
                "binarize-threshold",
                format!("must lie in (0, 1), got {}", self.binarize_threshold),
            ));
        }
        Ok(())
    }
}

fn check_median_size(size: usize) -> Result<()> {
    if size == 0 || size % 2 == 0 {
        return Err(Error::invalid("median-kernel", format!("size must be odd and >= 1, got {size}")));
    }
    Ok(())
}

/// `size x size` median with replicate padding. Size 1 returns the input.
pub fn median_filter(img: &ImagePlane, size: usize) -> Result<ImagePlane> {
    check_median_size(size)?;
    if size == 1 {
        return Ok(img.clone());
    }
    let (w, h) = img.dims();
    let r = (size / 2) as isize;
    let mid = size * size / 2;
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let mut window = Vec::with_capacity(size * size);
        for (x, o) in row.iter_mut().enumerate() {
            window.clear();
            for dy in -r..=r {
                for dx in -r..=r {
                    window.push(img.get_clamped(x as isize + dx, y as isize + dy));
                }
            }
            let (_, m, _) = window.select_nth_unstable_by(mid, f64::total_cmp);
            *o = *m;
        }
    });
    Ok(ImagePlane::from_parts(w, h, out))
}

/// Pixel is an edge iff its membership is at least `threshold`.
pub fn binarize(membership: &ImagePlane, threshold: f64) -> BinaryEdgeMap {
    BinaryEdgeMap::from_parts(
        membership.width(),
        membership.height(),
        membership.data().iter().map(|&m| m >= threshold).collect(),
    )
}

fn morph3(map: &BinaryEdgeMap, dilation: bool) -> BinaryEdgeMap {
    let (w, h) = map.dims();
    let mut bits = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut any = false;
            let mut all = true;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let (sx, sy) = (x as isize + dx, y as isize + dy);
                    let v = sx >= 0
                        && sy >= 0
                        && (sx as usize) < w
                        && (sy as usize) < h
                        && map.get(sx as usize, sy as usize);
                    any |= v;
                    all &= v;
                }
            }
            bits.push(if dilation { any } else { all });
        }
    }
    BinaryEdgeMap::from_parts(w, h, bits)
}

/// 3x3 square dilation.
pub fn dilate(map: &BinaryEdgeMap) -> BinaryEdgeMap {
    morph3(map, true)
}

/// 3x3 square erosion; pixels outside the raster count as background.
pub fn erode(map: &BinaryEdgeMap) -> BinaryEdgeMap {
    morph3(map, false)
}

pub fn apply_morphology(map: &BinaryEdgeMap, order: MorphOrder) -> BinaryEdgeMap {
    match order {
        MorphOrder::Close => erode(&dilate(map)),
        MorphOrder::Open => dilate(&erode(map)),
        MorphOrder::None => map.clone(),
    }
}

/// Median filter, binarization, then morphology.
pub fn refine(membership: &ImagePlane, cfg: &RefineConfig) -> Result<BinaryEdgeMap> {
    cfg.validate()?;
    let smoothed = median_filter(membership, cfg.median_kernel)?;
    let binary = binarize(&smoothed, cfg.binarize_threshold);
    Ok(apply_morphology(&binary, cfg.morph_order))
}
