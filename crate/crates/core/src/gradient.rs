//! Sobel gradients and the sigmoid membership map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{correlate, Kernel};
use crate::image::ImagePlane;

pub const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
pub const SOBEL_Y: [[f64; 3]; 3] = [[1.0, 2.0, 1.0], [0.0, 0.0, 0.0], [-1.0, -2.0, -1.0]];

#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub gx: ImagePlane,
    pub gy: ImagePlane,
    pub mag: ImagePlane,
    /// Direction in radians over `(-pi, pi]`. Diagnostic only.
    pub theta: ImagePlane,
}

/// Sobel responses (correlation, replicate padding), magnitude and
/// two-argument arctangent direction.
pub fn sobel(img: &ImagePlane) -> Result<GradientField> {
    let (w, h) = img.dims();
    if w < 3 || h < 3 {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            kernel: 3,
        });
    }
    let gx = correlate(img, &Kernel::centered3(SOBEL_X));
    let gy = correlate(img, &Kernel::centered3(SOBEL_Y));
    let mag = gx
        .data()
        .iter()
        .zip(gy.data())
        .map(|(&x, &y)| (x * x + y * y).sqrt())
        .collect();
    let theta = gx
        .data()
        .iter()
        .zip(gy.data())
        .map(|(&x, &y)| y.atan2(x))
        .collect();
    Ok(GradientField {
        mag: ImagePlane::from_parts(w, h, mag),
        theta: ImagePlane::from_parts(w, h, theta),
        gx,
        gy,
    })
}

/// Where the sigmoid is centred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Inflection {
    Median,
    Mean,
    Value(f64),
}

impl std::str::FromStr for Inflection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median" => Ok(Self::Median),
            "mean" => Ok(Self::Mean),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Self::Value)
                .ok_or_else(|| Error::invalid("x0", format!("expected median, mean or a number, got `{other}`"))),
        }
    }
}

impl std::fmt::Display for Inflection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Inflection::Median => f.write_str("median"),
            Inflection::Mean => f.write_str("mean"),
            Inflection::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipConfig {
    /// Steepness; must be positive.
    pub k: f64,
    pub x0: Inflection,
}

impl Default for MembershipConfig {
    fn default() -> Self {
        Self {
            k: 5.0,
            x0: Inflection::Median,
        }
    }
}

impl MembershipConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::invalid("k", format!("steepness must be positive, got {}", self.k)));
        }
        Ok(())
    }
}

/// Exact median; the mean of the two middle values for even counts.
pub fn median_of(plane: &ImagePlane) -> f64 {
    let mut v = plane.data().to_vec();
    let n = v.len();
    let mid = n / 2;
    let (lower, upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let below = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        below + (upper - below) / 2.0
    }
}

pub fn mean_of(plane: &ImagePlane) -> f64 {
    plane.data().iter().sum::<f64>() / plane.data().len() as f64
}

/// Logistic membership `1 / (1 + exp(-k (x - x0)))`.
#[inline]
pub fn sigmoid_membership(x: f64, k: f64, x0: f64) -> f64 {
    1.0 / (1.0 + (-k * (x - x0)).exp())
}

/// Maps gradient magnitudes to membership degrees in `(0, 1)`.
pub fn membership(mag: &ImagePlane, cfg: &MembershipConfig) -> Result<ImagePlane> {
    cfg.validate()?;
    let x0 = resolve_inflection(mag, cfg.x0);
    mag.map(|x| sigmoid_membership(x, cfg.k, x0))
}

pub fn resolve_inflection(mag: &ImagePlane, x0: Inflection) -> f64 {
    match x0 {
        Inflection::Median => median_of(mag),
        Inflection::Mean => mean_of(mag),
        Inflection::Value(v) => v,
    }
}
