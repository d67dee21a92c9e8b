//! Region-wise independence filtering of a candidate edge map.
//!
//! A square window slides over the map in raster order. The edge pixels in
//! each window are tested for dependence between their x and y
//! displacements; a pixel survives when at least one window containing it was
//! tested and found dependent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryEdgeMap, Pixel};
use crate::stats::{build_table, independence_test, FisherMode, TestConfig, TestResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditConfig {
    pub window: usize,
    pub stride: usize,
    /// Displacement limit for the contingency table.
    pub k: usize,
    pub alpha: f64,
    /// Windows with fewer edge pixels are skipped.
    pub min_points: usize,
    pub fisher_mode: FisherMode,
}

impl Default for EditConfig {
    fn default() -> Self {
        Self {
            window: 15,
            stride: 5,
            k: 3,
            alpha: 0.05,
            min_points: 5,
            fisher_mode: FisherMode::Point,
        }
    }
}

impl EditConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 || self.window < self.stride {
            return Err(Error::invalid(
                "window",
                format!("need window >= stride >= 1, got window {} stride {}", self.window, self.stride),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    fn test_config(&self) -> TestConfig {
        TestConfig {
            alpha: self.alpha,
            fisher_mode: self.fisher_mode,
        }
    }
}

/// Outcome for one window position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowDecision {
    /// Top-left corner `(x, y)`.
    pub origin: (usize, usize),
    /// Extent after clamping to the raster.
    pub size: (usize, usize),
    pub points: usize,
    /// `None` when the window held fewer than `min_points` edge pixels.
    pub result: Option<TestResult>,
    pub kept: bool,
}

/// Window origins along one axis: multiples of the stride, with the last
/// window pulled back to end at the border.
pub fn window_origins(dim: usize, window: usize, stride: usize) -> Vec<usize> {
    if window >= dim {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut o = 0;
    loop {
        let clamped = o.min(dim - window);
        if out.last() != Some(&clamped) {
            out.push(clamped);
        }
        if o + window >= dim {
            break;
        }
        o += stride;
    }
    out
}

fn window_points(map: &BinaryEdgeMap, ox: usize, oy: usize, w: usize, h: usize) -> Vec<Pixel> {
    let mut pts = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if map.get(ox + x, oy + y) {
                pts.push(Pixel::new(x, y));
            }
        }
    }
    pts
}

/// Tests every window position, in raster order of the origins.
pub fn sweep_windows(map: &BinaryEdgeMap, cfg: &EditConfig) -> Result<Vec<WindowDecision>> {
    cfg.validate()?;
    let (w, h) = map.dims();
    let size = (cfg.window.min(w), cfg.window.min(h));
    let xs = window_origins(w, cfg.window, cfg.stride);
    let ys = window_origins(h, cfg.window, cfg.stride);
    let origins: Vec<(usize, usize)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let tests = cfg.test_config();
    origins
        .par_iter()
        .map(|&(ox, oy)| {
            let pts = window_points(map, ox, oy, size.0, size.1);
            let points = pts.len();
            if points < cfg.min_points.max(2) {
                return Ok(WindowDecision {
                    origin: (ox, oy),
                    size,
                    points,
                    result: None,
                    kept: false,
                });
            }
            let table = build_table(&pts, cfg.k)?;
            let result = independence_test(&table, &tests)?;
            Ok(WindowDecision {
                origin: (ox, oy),
                size,
                points,
                result: Some(result),
                kept: result.dependent,
            })
        })
        .collect()
}

/// Keeps the edge pixels covered by at least one dependent window.
pub fn combine(map: &BinaryEdgeMap, decisions: &[WindowDecision]) -> BinaryEdgeMap {
    let (w, h) = map.dims();
    let mut covered = vec![false; w * h];
    for d in decisions.iter().filter(|d| d.kept) {
        let (ox, oy) = d.origin;
        for y in oy..oy + d.size.1 {
            covered[y * w + ox..y * w + ox + d.size.0].fill(true);
        }
    }
    let bits = map.bits().iter().zip(covered).map(|(&b, c)| b && c).collect();
    BinaryEdgeMap::new(w, h, bits).expect("dims taken from input map")
}

pub fn edit_filter(map: &BinaryEdgeMap, cfg: &EditConfig) -> Result<BinaryEdgeMap> {
    let decisions = sweep_windows(map, cfg)?;
    Ok(combine(map, &decisions))
}

/// One line per window: `x y method p kept`.
pub fn format_decisions(decisions: &[WindowDecision]) -> String {
    let mut out = String::from("x\ty\tpoints\tmethod\tp\tkept\n");
    for d in decisions {
        let (method, p) = match &d.result {
            Some(r) => (r.method.to_string(), format!("{:.6e}", r.p)),
            None => ("skipped".to_string(), "-".to_string()),
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            d.origin.0, d.origin.1, d.points, method, p, d.kept
        ));
    }
    out
}
