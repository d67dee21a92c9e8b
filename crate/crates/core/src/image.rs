//! Raster value types.
//!
//! All planes are row-major `f64`. Color input lives on the `[0, 1]` working
//! scale; derived planes (gradients, features) may leave that range but are
//! always finite.

use std::collections::HashSet;

use crate::error::{Error, Result};

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "width and height must be at least 1",
        });
    }
    Ok(())
}

/// A single real-valued raster.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImagePlane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "data length differs from width*height",
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Internal constructor for stage outputs whose shape and finiteness
    /// follow from a validated input.
    pub(crate) fn from_parts(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Sample with replicate padding.
    #[inline]
    pub(crate) fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    /// True when every sample lies in `[0, 1]`.
    pub fn is_normalized(&self) -> bool {
        self.data.iter().all(|v| (0.0..=1.0).contains(v))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn same_dims(&self, other: &ImagePlane) -> Result<()> {
        ensure_same_dims(self.dims(), other.dims())
    }
}

pub(crate) fn ensure_same_dims(left: (usize, usize), right: (usize, usize)) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch {
            left_w: left.0,
            left_h: left.1,
            right_w: right.0,
            right_h: right.1,
        });
    }
    Ok(())
}

/// An ordered stack of equally sized planes. Three channels means RGB.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelImage {
    channels: Vec<ImagePlane>,
}

impl MultiChannelImage {
    pub fn new(channels: Vec<ImagePlane>) -> Result<Self> {
        let first = channels.first().ok_or(Error::UnsupportedChannels(0))?;
        for c in &channels[1..] {
            first.same_dims(c)?;
        }
        Ok(Self { channels })
    }

    pub fn from_gray(plane: ImagePlane) -> Self {
        Self {
            channels: vec![plane],
        }
    }

    /// Builds an RGB image from interleaved samples.
    pub fn from_interleaved_rgb(width: usize, height: usize, rgb: &[f64]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "interleaved RGB length differs from 3*width*height",
            });
        }
        let planes = (0..3)
            .map(|c| ImagePlane::new(width, height, rgb.iter().skip(c).step_by(3).copied().collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(planes)
    }

    pub fn channels(&self) -> &[ImagePlane] {
        &self.channels
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn width(&self) -> usize {
        self.channels[0].width()
    }

    pub fn height(&self) -> usize {
        self.channels[0].height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.channels[0].dims()
    }

    pub fn into_channels(self) -> Vec<ImagePlane> {
        self.channels
    }
}

/// Luminance conversion: a single channel is copied, three channels are
/// combined with the Rec. 601 weights.
pub fn to_grayscale(img: &MultiChannelImage) -> Result<ImagePlane> {
    match img.channels() {
        [gray] => Ok(gray.clone()),
        [r, g, b] => {
            let data = r
                .data()
                .iter()
                .zip(g.data())
                .zip(b.data())
                .map(|((&r, &g), &b)| 0.299 * r + 0.587 * g + 0.114 * b)
                .collect();
            Ok(ImagePlane::from_parts(r.width(), r.height(), data))
        }
        other => Err(Error::UnsupportedChannels(other.len())),
    }
}

/// A pixel coordinate: `x` is the column, `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub x: usize,
    pub y: usize,
}

impl Pixel {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// `(|dx|, |dy|)` to another pixel.
    pub fn displacement(self, other: Pixel) -> (usize, usize) {
        (self.x.abs_diff(other.x), self.y.abs_diff(other.y))
    }
}

/// A set of distinct pixel coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PixelCoordSet {
    points: Vec<Pixel>,
}

impl PixelCoordSet {
    pub fn new(points: Vec<Pixel>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if !seen.insert(*p) {
                return Err(Error::DuplicatePoint { x: p.x, y: p.y });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Pixel] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One boolean per pixel, `true` marking an edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryEdgeMap {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryEdgeMap {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if bits.len() != width * height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "bit count differs from width*height",
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    pub fn from_coords(width: usize, height: usize, coords: &PixelCoordSet) -> Result<Self> {
        let mut map = Self::empty(width, height)?;
        for p in coords.points() {
            if p.x >= width || p.y >= height {
                return Err(Error::OutOfBounds {
                    x: p.x,
                    y: p.y,
                    width,
                    height,
                });
            }
            map.bits[p.y * width + p.x] = true;
        }
        Ok(map)
    }

    pub(crate) fn from_parts(width: usize, height: usize, bits: Vec<bool>) -> Self {
        debug_assert_eq!(bits.len(), width * height);
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Edge pixels in raster order.
    pub fn coords(&self) -> PixelCoordSet {
        let points = self
            .bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| Pixel::new(i % self.width, i / self.width))
            .collect();
        PixelCoordSet { points }
    }

    /// `true` when every edge pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryEdgeMap) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// 0/1 plane view used by the metrics.
    pub fn to_plane(&self) -> ImagePlane {
        ImagePlane::from_parts(
            self.width,
            self.height,
            self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
    }
}

/// Seed for every random draw in the crate. Equal seeds give equal draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    pub fn rng(self) -> rand_chacha::ChaCha8Rng {
        use rand::SeedableRng;
        rand_chacha::ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Derived seed for the `index`-th independent stream.
    pub fn derive(self, index: u64) -> RandomSeed {
        // splitmix64 step
        let mut z = self.0.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RandomSeed(z ^ (z >> 31))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgb(r: f64, g: f64, b: f64) -> MultiChannelImage {
        MultiChannelImage::new(vec![
            ImagePlane::filled(2, 2, r).unwrap(),
            ImagePlane::filled(2, 2, g).unwrap(),
            ImagePlane::filled(2, 2, b).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn grayscale_weights() {
        let g = to_grayscale(&rgb(0.5, 0.5, 0.5)).unwrap();
        assert!(g.data().iter().all(|&v| (v - 0.5).abs() < 1e-15));
        let g = to_grayscale(&rgb(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(g.get(0, 0), 0.299);
        let g = to_grayscale(&rgb(0.2, 0.4, 0.6)).unwrap();
        assert!((g.get(1, 1) - 0.363).abs() < 1e-12);
    }

    #[test]
    fn grayscale_rejects_two_channels() {
        let p = ImagePlane::filled(2, 2, 0.0).unwrap();
        let img = MultiChannelImage::new(vec![p.clone(), p]).unwrap();
        assert!(matches!(to_grayscale(&img), Err(Error::UnsupportedChannels(2))));
    }

    #[test]
    fn plane_validation() {
        assert!(ImagePlane::new(0, 3, vec![]).is_err());
        assert!(ImagePlane::new(2, 2, vec![0.0; 3]).is_err());
        assert!(matches!(
            ImagePlane::new(1, 2, vec![0.0, f64::NAN]),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn mixed_dims_rejected() {
        let a = ImagePlane::filled(2, 2, 0.0).unwrap();
        let b = ImagePlane::filled(3, 2, 0.0).unwrap();
        assert!(MultiChannelImage::new(vec![a, b]).is_err());
    }

    #[test]
    fn coord_set_rejects_duplicates_and_bounds() {
        assert!(PixelCoordSet::new(vec![Pixel::new(1, 1), Pixel::new(1, 1)]).is_err());
        let set = PixelCoordSet::new(vec![Pixel::new(4, 0)]).unwrap();
        assert!(BinaryEdgeMap::from_coords(4, 4, &set).is_err());
    }

    #[test]
    fn coords_round_trip() {
        let map = BinaryEdgeMap::from_fn(5, 4, |x, y| (x + y) % 3 == 0).unwrap();
        let back = BinaryEdgeMap::from_coords(5, 4, &map.coords()).unwrap();
        assert_eq!(map, back);
    }

    #[test]
    fn derived_seeds_differ() {
        let s = RandomSeed(7);
        assert_ne!(s.derive(0), s.derive(1));
        assert_eq!(s.derive(3), s.derive(3));
    }

    proptest::proptest! {
        #[test]
        fn grayscale_within_channel_range(r in 0.0f64..=1.0, g in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let v = to_grayscale(&rgb(r, g, b)).unwrap().get(0, 0);
            let lo = r.min(g).min(b);
            let hi = r.max(g).max(b);
            proptest::prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }
}
