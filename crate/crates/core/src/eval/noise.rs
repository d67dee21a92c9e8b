use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{ImagePlane, MultiChannelImage, RandomSeed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Gaussian,
    SaltPepper,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "salt-pepper" => Ok(Self::SaltPepper),
            other => Err(Error::invalid("noise", format!("expected gaussian or salt-pepper, got `{other}`"))),
        }
    }
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::SaltPepper => "salt-pepper",
        })
    }
}

/// `level` is sigma on the 0-255 scale for Gaussian noise, and the fraction
/// of pixels hit for salt-and-pepper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub level: f64,
    pub seed: RandomSeed,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.level >= 0.0 && self.level.is_finite()) {
            return Err(Error::invalid("noise-level", format!("must be >= 0, got {}", self.level)));
        }
        if self.kind == NoiseKind::SaltPepper && self.level > 1.0 {
            return Err(Error::invalid("noise-level", format!("salt-pepper fraction must be <= 1, got {}", self.level)));
        }
        Ok(())
    }
}

pub fn add_noise(img: &ImagePlane, spec: &NoiseSpec) -> Result<ImagePlane> {
    let out = add_noise_image(&MultiChannelImage::from_gray(img.clone()), spec)?;
    Ok(out.into_channels().remove(0))
}

/// Applies noise to every channel. Salt-and-pepper hits the same pixels in
/// all channels with the same value.
pub fn add_noise_image(img: &MultiChannelImage, spec: &NoiseSpec) -> Result<MultiChannelImage> {
    spec.validate()?;
    if spec.level == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = spec.seed.rng();
    let (w, h) = img.dims();
    let mut planes: Vec<Vec<f64>> = img.channels().iter().map(|p| p.data().to_vec()).collect();
    match spec.kind {
        NoiseKind::Gaussian => {
            let normal = Normal::new(0.0, spec.level / 255.0)
                .map_err(|e| Error::invalid("noise-level", e.to_string()))?;
            for plane in &mut planes {
                for v in plane.iter_mut() {
                    *v = (*v + normal.sample(&mut rng)).clamp(0.0, 1.0);
                }
            }
        }
        NoiseKind::SaltPepper => {
            let count = (spec.level * (w * h) as f64).floor() as usize;
            let hit = rand::seq::index::sample(&mut rng, w * h, count.min(w * h));
            for i in hit.iter() {
                let value = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
                for plane in &mut planes {
                    plane[i] = value;
                }
            }
        }
    }
    let planes = planes
        .into_iter()
        .map(|d| ImagePlane::new(w, h, d))
        .collect::<Result<Vec<_>>>()?;
    MultiChannelImage::new(planes)
}
