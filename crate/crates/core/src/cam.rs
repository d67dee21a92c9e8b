//! Channel-attention feature extraction.
//!
//! The extractor runs a fixed (untrained) dual convolution over the color
//! channels: a 3x3 depthwise pass per channel, then a 2x2 spatial pass whose
//! outputs are mixed across channels. After ReLU and 2x2 max pooling, each
//! channel's spatial mean is squashed by a logistic to give its attention
//! weight. The weights are applied to the original full-resolution channels
//! to fuse them into a single plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{correlate, Kernel};
use crate::image::{ImagePlane, MultiChannelImage};

/// Per-channel feature planes.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMaps {
    planes: Vec<ImagePlane>,
}

impl FeatureMaps {
    pub fn new(planes: Vec<ImagePlane>) -> Result<Self> {
        Ok(Self {
            planes: MultiChannelImage::new(planes)?.into_channels(),
        })
    }

    pub fn from_image(img: &MultiChannelImage) -> Self {
        Self {
            planes: img.channels().to_vec(),
        }
    }

    pub fn planes(&self) -> &[ImagePlane] {
        &self.planes
    }

    pub fn channel_count(&self) -> usize {
        self.planes.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.planes[0].dims()
    }
}

/// One attention weight per channel, each strictly inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelWeights {
    pub alpha: Vec<f64>,
}

/// Convolution weights for the extractor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CamKernels {
    /// One 3x3 kernel per channel, rows top to bottom.
    pub depthwise: Vec<[[f64; 3]; 3]>,
    /// Shared 2x2 spatial kernel of the pointwise stage.
    pub pointwise: [[f64; 2]; 2],
    /// `mix[c][c2]` scales channel `c2`'s 2x2 response into output `c`.
    pub mix: Vec<Vec<f64>>,
}

pub const HIGH_BOOST: [[f64; 3]; 3] = [[0.0, -1.0, 0.0], [-1.0, 5.0, -1.0], [0.0, -1.0, 0.0]];

impl CamKernels {
    /// High-boost depthwise kernels, a uniform 2x2 box, and a mixing matrix
    /// with 0.5 on the diagonal and 0.25 elsewhere.
    pub fn default_for(channels: usize) -> Self {
        let mix = (0..channels)
            .map(|c| {
                (0..channels)
                    .map(|c2| if c == c2 { 0.5 } else { 0.25 })
                    .collect()
            })
            .collect();
        Self {
            depthwise: vec![HIGH_BOOST; channels],
            pointwise: [[0.25, 0.25], [0.25, 0.25]],
            mix,
        }
    }

    pub fn validate(&self, channels: usize) -> Result<()> {
        if self.depthwise.len() != channels {
            return Err(Error::KernelMismatch(format!(
                "{} depthwise kernels for {channels} channels",
                self.depthwise.len()
            )));
        }
        if self.mix.len() != channels || self.mix.iter().any(|r| r.len() != channels) {
            return Err(Error::KernelMismatch(format!(
                "mixing matrix must be {channels}x{channels}"
            )));
        }
        let finite = self.depthwise.iter().flatten().flatten().all(|v| v.is_finite())
            && self.pointwise.iter().flatten().all(|v| v.is_finite())
            && self.mix.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::KernelMismatch("non-finite kernel weight".into()));
        }
        Ok(())
    }
}

impl Default for CamKernels {
    fn default() -> Self {
        Self::default_for(3)
    }
}

pub fn depthwise_conv(img: &MultiChannelImage, kernels: &CamKernels) -> Result<FeatureMaps> {
    if kernels.depthwise.len() != img.channel_count() {
        return Err(Error::KernelMismatch(format!(
            "{} depthwise kernels for {} channels",
            kernels.depthwise.len(),
            img.channel_count()
        )));
    }
    let planes = img
        .channels()
        .iter()
        .zip(&kernels.depthwise)
        .map(|(plane, k)| correlate(plane, &Kernel::centered3(*k)))
        .collect();
    Ok(FeatureMaps { planes })
}

pub fn pointwise_conv(feat: &FeatureMaps, kernels: &CamKernels) -> Result<FeatureMaps> {
    let c = feat.channel_count();
    if kernels.mix.len() != c || kernels.mix.iter().any(|r| r.len() != c) {
        return Err(Error::KernelMismatch(format!("mixing matrix must be {c}x{c}")));
    }
    let spatial = Kernel::top_left2(kernels.pointwise);
    let responses: Vec<ImagePlane> = feat.planes.iter().map(|p| correlate(p, &spatial)).collect();
    let (w, h) = feat.dims();
    let planes = kernels
        .mix
        .iter()
        .map(|row| {
            let mut out = vec![0.0; w * h];
            for (weight, resp) in row.iter().zip(&responses) {
                for (o, &v) in out.iter_mut().zip(resp.data()) {
                    *o += weight * v;
                }
            }
            ImagePlane::from_parts(w, h, out)
        })
        .collect();
    Ok(FeatureMaps { planes })
}

pub fn relu(feat: &FeatureMaps) -> FeatureMaps {
    let planes = feat
        .planes
        .iter()
        .map(|p| ImagePlane::from_parts(p.width(), p.height(), p.data().iter().map(|&v| v.max(0.0)).collect()))
        .collect();
    FeatureMaps { planes }
}

/// Non-overlapping `n x n` max pooling. Output dims round up; border slices
/// take the maximum of the pixels they cover.
pub fn max_pool(feat: &FeatureMaps, n: usize) -> Result<FeatureMaps> {
    if n == 0 {
        return Err(Error::invalid("pool", "window must be at least 1"));
    }
    let planes = feat.planes.iter().map(|p| max_pool_plane(p, n)).collect();
    Ok(FeatureMaps { planes })
}

fn max_pool_plane(p: &ImagePlane, n: usize) -> ImagePlane {
    let (w, h) = p.dims();
    let (ow, oh) = (w.div_ceil(n), h.div_ceil(n));
    let mut out = Vec::with_capacity(ow * oh);
    for oy in 0..oh {
        for ox in 0..ow {
            let mut m = f64::NEG_INFINITY;
            for y in oy * n..((oy + 1) * n).min(h) {
                for x in ox * n..((ox + 1) * n).min(w) {
                    m = m.max(p.get(x, y));
                }
            }
            out.push(m);
        }
    }
    ImagePlane::from_parts(ow, oh, out)
}

#[inline]
pub(crate) fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Logistic of each channel's spatial mean. The mean is summed in raster
/// order.
pub fn channel_weights(feat: &FeatureMaps) -> ChannelWeights {
    let alpha = feat
        .planes
        .iter()
        .map(|p| {
            let sum: f64 = p.data().iter().sum();
            logistic(sum / p.data().len() as f64)
        })
        .collect();
    ChannelWeights { alpha }
}

/// Weighted channel average `sum(a_c * I_c) / sum(a_c)`.
pub fn fuse(img: &MultiChannelImage, weights: &ChannelWeights) -> Result<ImagePlane> {
    if weights.alpha.len() != img.channel_count() {
        return Err(Error::KernelMismatch(format!(
            "{} weights for {} channels",
            weights.alpha.len(),
            img.channel_count()
        )));
    }
    let total: f64 = weights.alpha.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("weights", "weights must sum to a positive value"));
    }
    let (w, h) = img.dims();
    let mut out = vec![0.0; w * h];
    for (a, plane) in weights.alpha.iter().zip(img.channels()) {
        for (o, &v) in out.iter_mut().zip(plane.data()) {
            *o += a * v;
        }
    }
    for o in &mut out {
        *o = (*o / total).clamp(0.0, 1.0);
    }
    ImagePlane::new(w, h, out)
}

/// Fused enhanced plane plus the weights that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CamOutput {
    pub fused: ImagePlane,
    pub weights: ChannelWeights,
}

/// Full extractor for a three-channel image.
pub fn cam_extract(img: &MultiChannelImage, kernels: &CamKernels) -> Result<CamOutput> {
    if img.channel_count() != 3 {
        return Err(Error::UnsupportedChannels(img.channel_count()));
    }
    kernels.validate(3)?;
    let feat = depthwise_conv(img, kernels)?;
    let feat = pointwise_conv(&feat, kernels)?;
    let feat = relu(&feat);
    let feat = max_pool(&feat, 2)?;
    let weights = channel_weights(&feat);
    let fused = fuse(img, &weights)?;
    Ok(CamOutput { fused, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(w: usize, h: usize, v: &[f64]) -> ImagePlane {
        ImagePlane::new(w, h, v.to_vec()).unwrap()
    }

    fn three(p: ImagePlane) -> MultiChannelImage {
        MultiChannelImage::new(vec![p.clone(), p.clone(), p]).unwrap()
    }

    fn texture(w: usize, h: usize, phase: f64) -> ImagePlane {
        ImagePlane::from_fn(w, h, |x, y| 0.5 + 0.4 * ((x as f64 * 0.7 + phase).sin() * (y as f64 * 0.3).cos()))
            .unwrap()
    }

    #[test]
    fn depthwise_preserves_constants() {
        let img = three(ImagePlane::filled(5, 4, 0.3).unwrap());
        let out = depthwise_conv(&img, &CamKernels::default()).unwrap();
        for p in out.planes() {
            assert!(p.data().iter().all(|&v| (v - 0.3).abs() < 1e-15));
        }
    }

    #[test]
    fn depthwise_kernel_count_checked() {
        let img = MultiChannelImage::from_gray(ImagePlane::filled(3, 3, 0.0).unwrap());
        assert!(matches!(
            depthwise_conv(&img, &CamKernels::default()),
            Err(Error::KernelMismatch(_))
        ));
    }

    #[test]
    fn pointwise_cases() {
        let k = CamKernels::default_for(1);
        let mut ident = k.clone();
        ident.mix = vec![vec![1.0]];
        let constant = FeatureMaps::new(vec![ImagePlane::filled(4, 4, 0.7).unwrap()]).unwrap();
        let out = pointwise_conv(&constant, &ident).unwrap();
        assert!(out.planes()[0].data().iter().all(|&v| (v - 0.7).abs() < 1e-15));

        let mut zero = k.clone();
        zero.mix = vec![vec![0.0]];
        let out = pointwise_conv(&constant, &zero).unwrap();
        assert!(out.planes()[0].data().iter().all(|&v| v == 0.0));

        let checker = ImagePlane::from_fn(6, 6, |x, y| ((x + y) % 2) as f64).unwrap();
        let out = pointwise_conv(&FeatureMaps::new(vec![checker]).unwrap(), &ident).unwrap();
        for y in 0..5 {
            for x in 0..5 {
                assert_eq!(out.planes()[0].get(x, y), 0.5);
            }
        }

        let mut bad = k;
        bad.mix = vec![vec![1.0, 0.0]];
        assert!(pointwise_conv(&constant, &bad).is_err());
    }

    #[test]
    fn relu_branches() {
        let f = FeatureMaps::new(vec![plane(3, 1, &[-1.0, 0.0, 2.0])]).unwrap();
        assert_eq!(relu(&f).planes()[0].data(), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn pool_cases() {
        let p = plane(4, 4, &(1..=16).map(f64::from).collect::<Vec<_>>());
        let out = max_pool(&FeatureMaps::new(vec![p]).unwrap(), 2).unwrap();
        assert_eq!(out.planes()[0].dims(), (2, 2));
        assert_eq!(out.planes()[0].data(), &[6.0, 8.0, 14.0, 16.0]);

        let p = plane(3, 3, &[1.0, 9.0, 2.0, 3.0, 4.0, 8.0, 7.0, 5.0, 6.0]);
        let out = max_pool(&FeatureMaps::new(vec![p]).unwrap(), 2).unwrap();
        assert_eq!(out.planes()[0].dims(), (2, 2));
        // slices: {1,9,3,4} {2,8} {7,5} {6}
        assert_eq!(out.planes()[0].data(), &[9.0, 8.0, 7.0, 6.0]);

        let c = FeatureMaps::new(vec![ImagePlane::filled(6, 4, 0.2).unwrap()]).unwrap();
        let out = max_pool(&c, 2).unwrap();
        assert_eq!(out.dims(), (3, 2));
        assert!(out.planes()[0].data().iter().all(|&v| v == 0.2));

        assert!(max_pool(&c, 0).is_err());
    }

    #[test]
    fn weight_values() {
        let zero = FeatureMaps::new(vec![ImagePlane::filled(2, 2, 0.0).unwrap()]).unwrap();
        assert_eq!(channel_weights(&zero).alpha, vec![0.5]);
        let ten = FeatureMaps::new(vec![ImagePlane::filled(2, 2, 10.0).unwrap()]).unwrap();
        assert!((channel_weights(&ten).alpha[0] - 0.999_954_602_131_297_6).abs() < 1e-12);
        let two = FeatureMaps::new(vec![
            ImagePlane::filled(2, 2, 0.6).unwrap(),
            ImagePlane::filled(2, 2, 0.4).unwrap(),
        ])
        .unwrap();
        let a = channel_weights(&two).alpha;
        assert!(a[0] > a[1]);
    }

    #[test]
    fn fuse_cases() {
        let img = MultiChannelImage::new(vec![
            plane(1, 1, &[1.0]),
            plane(1, 1, &[0.0]),
            plane(1, 1, &[0.0]),
        ])
        .unwrap();
        let out = fuse(&img, &ChannelWeights { alpha: vec![0.5, 0.5, 0.25] }).unwrap();
        assert!((out.get(0, 0) - 0.4).abs() < 1e-15);

        let eq = fuse(&img, &ChannelWeights { alpha: vec![0.3, 0.3, 0.3] }).unwrap();
        assert!((eq.get(0, 0) - 1.0 / 3.0).abs() < 1e-15);

        let eps = 1e-9;
        let near = fuse(&img, &ChannelWeights { alpha: vec![1.0 - eps, eps, eps] }).unwrap();
        assert!((near.get(0, 0) - 1.0).abs() < 1e-8);

        assert!(fuse(&img, &ChannelWeights { alpha: vec![0.5] }).is_err());
    }

    #[test]
    fn replicated_gray_gives_equal_weights() {
        let out = cam_extract(&three(texture(9, 7, 0.0)), &CamKernels::default()).unwrap();
        assert!(out.weights.alpha.windows(2).all(|w| w[0] == w[1]));
        let src = texture(9, 7, 0.0);
        for (a, b) in out.fused.data().iter().zip(src.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_channel_gets_smallest_weight() {
        let img = MultiChannelImage::new(vec![
            texture(12, 12, 0.0),
            ImagePlane::filled(12, 12, 0.0).unwrap(),
            texture(12, 12, 1.3),
        ])
        .unwrap();
        let out = cam_extract(&img, &CamKernels::default()).unwrap();
        let a = &out.weights.alpha;
        assert!(a[1] < a[0] && a[1] < a[2]);
    }

    #[test]
    fn single_pixel_image() {
        let img = MultiChannelImage::new(vec![
            plane(1, 1, &[0.2]),
            plane(1, 1, &[0.4]),
            plane(1, 1, &[0.6]),
        ])
        .unwrap();
        let out = cam_extract(&img, &CamKernels::default()).unwrap();
        // every stage keeps a constant 1x1 plane; the pointwise stage mixes
        // channels 0.5/0.25/0.25
        let mixed = [0.5 * 0.2 + 0.25 * 0.4 + 0.25 * 0.6, 0.25 * 0.2 + 0.5 * 0.4 + 0.25 * 0.6, 0.25 * 0.2 + 0.25 * 0.4 + 0.5 * 0.6];
        for (a, m) in out.weights.alpha.iter().zip(mixed) {
            assert!((a - 1.0 / (1.0 + (-m as f64).exp())).abs() < 1e-12);
        }
        assert_eq!(out.fused.dims(), (1, 1));
    }

    #[test]
    fn requires_three_channels() {
        let img = MultiChannelImage::from_gray(ImagePlane::filled(3, 3, 0.0).unwrap());
        assert!(matches!(
            cam_extract(&img, &CamKernels::default()),
            Err(Error::UnsupportedChannels(1))
        ));
    }

    proptest::proptest! {
        #[test]
        fn relu_idempotent(v in proptest::collection::vec(-5.0f64..5.0, 12)) {
            let f = FeatureMaps::new(vec![plane(4, 3, &v)]).unwrap();
            proptest::prop_assert_eq!(relu(&relu(&f)), relu(&f));
        }

        #[test]
        fn pooling_keeps_extremes(v in proptest::collection::vec(-5.0f64..5.0, 35)) {
            let p = plane(7, 5, &v);
            let (lo, hi) = p.min_max();
            let out = max_pool(&FeatureMaps::new(vec![p]).unwrap(), 2).unwrap();
            let (plo, phi) = out.planes()[0].min_max();
            proptest::prop_assert_eq!(phi, hi);
            proptest::prop_assert!(plo >= lo);
        }

        #[test]
        fn weight_increases_with_mean(base in proptest::collection::vec(0.0f64..1.0, 16), bump in 0.01f64..1.0) {
            let p = plane(4, 4, &base);
            let q = p.map(|v| v + bump).unwrap();
            let a = channel_weights(&FeatureMaps::new(vec![p, q]).unwrap()).alpha;
            proptest::prop_assert!(a[1] > a[0]);
        }

        #[test]
        fn fuse_identity_on_equal_channels(v in proptest::collection::vec(0.0f64..=1.0, 6),
                                            a in proptest::collection::vec(0.01f64..1.0, 3)) {
            let img = three(plane(3, 2, &v));
            let out = fuse(&img, &ChannelWeights { alpha: a }).unwrap();
            for (o, s) in out.data().iter().zip(&v) {
                proptest::prop_assert!((o - s).abs() < 1e-12);
            }
        }
    }
}
