//! Deterministic synthetic scenes with exact ground truth.
//!
//! Each scene is a union of soft-edged shapes over a flat background, with
//! mild Gaussian sensor noise and a few small clutter specks that are not part
//! of the ground truth. The ground truth is the one-pixel inner contour
//! of the shape mask.

use rand::Rng;

use crate::error::Result;
use crate::eval::bench::CorpusItem;
use crate::eval::noise::{add_noise_image, NoiseKind, NoiseSpec};
use crate::image::{BinaryEdgeMap, ImagePlane, MultiChannelImage, RandomSeed};

pub const SIZE: usize = 200;

#[derive(Debug, Clone, Copy)]
enum Shape {
    Disk { cx: f64, cy: f64, r: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64, angle: f64 },
    /// Square rotated by `angle` with half side `s`.
    Square { cx: f64, cy: f64, s: f64, angle: f64 },
    Triangle { p: [(f64, f64); 3] },
    Ring { cx: f64, cy: f64, r_in: f64, r_out: f64 },
}

fn seg_dist(px: f64, py: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let t = (((px - a.0) * dx + (py - a.1) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    (px - a.0 - t * dx).hypot(py - a.1 - t * dy)
}

impl Shape {
    /// Signed distance, negative inside (approximate for ellipses).
    fn sdf(&self, x: f64, y: f64) -> f64 {
        match *self {
            Shape::Disk { cx, cy, r } => (x - cx).hypot(y - cy) - r,
            Shape::Ellipse { cx, cy, rx, ry, angle } => {
                let (s, c) = angle.sin_cos();
                let (u, v) = ((x - cx) * c + (y - cy) * s, -(x - cx) * s + (y - cy) * c);
                let k = (u / rx).hypot(v / ry);
                (k - 1.0) * rx.min(ry)
            }
            Shape::Square { cx, cy, s, angle } => {
                let (sn, c) = angle.sin_cos();
                let (u, v) = ((x - cx) * c + (y - cy) * sn, -(x - cx) * sn + (y - cy) * c);
                let (qx, qy) = (u.abs() - s, v.abs() - s);
                qx.max(0.0).hypot(qy.max(0.0)) + qx.max(qy).min(0.0)
            }
            Shape::Triangle { p } => {
                let d = (0..3)
                    .map(|i| seg_dist(x, y, p[i], p[(i + 1) % 3]))
                    .fold(f64::INFINITY, f64::min);
                let side = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0);
                let s = [side(p[0], p[1]), side(p[1], p[2]), side(p[2], p[0])];
                let inside = s.iter().all(|&v| v >= 0.0) || s.iter().all(|&v| v <= 0.0);
                if inside {
                    -d
                } else {
                    d
                }
            }
            Shape::Ring { cx, cy, r_in, r_out } => {
                let d = (x - cx).hypot(y - cy);
                (d - r_out).max(r_in - d)
            }
        }
    }
}

struct Scene {
    name: &'static str,
    background: [f64; 3],
    shapes: Vec<(Shape, [f64; 3])>,
}

fn scenes() -> Vec<Scene> {
    use std::f64::consts::PI;
    vec![
        Scene {
            name: "disks",
            background: [0.15, 0.2, 0.25],
            shapes: vec![
                (Shape::Disk { cx: 70.0, cy: 75.0, r: 40.0 }, [0.85, 0.55, 0.3]),
                (Shape::Disk { cx: 140.0, cy: 135.0, r: 32.0 }, [0.3, 0.75, 0.6]),
            ],
        },
        Scene {
            name: "ellipse",
            background: [0.8, 0.78, 0.7],
            shapes: vec![(
                Shape::Ellipse { cx: 100.0, cy: 100.0, rx: 70.0, ry: 40.0, angle: PI / 6.0 },
                [0.2, 0.3, 0.55],
            )],
        },
        Scene {
            name: "diamond",
            background: [0.1, 0.12, 0.1],
            shapes: vec![
                (Shape::Square { cx: 100.0, cy: 100.0, s: 50.0, angle: PI / 4.0 }, [0.7, 0.7, 0.2]),
            ],
        },
        Scene {
            name: "triangle",
            background: [0.25, 0.35, 0.2],
            shapes: vec![(
                Shape::Triangle { p: [(30.0, 165.0), (100.0, 30.0), (172.0, 150.0)] },
                [0.9, 0.85, 0.8],
            )],
        },
        Scene {
            name: "ring",
            background: [0.6, 0.25, 0.25],
            shapes: vec![(
                Shape::Ring { cx: 100.0, cy: 100.0, r_in: 30.0, r_out: 70.0 },
                [0.1, 0.15, 0.45],
            )],
        },
    ]
}

/// Edge softness in pixels of the rendered transitions.
const SOFTNESS: f64 = 1.0;
/// Sensor noise sigma on the 0-255 scale.
const SENSOR_SIGMA: f64 = 4.0;
const SPECKS: usize = 30;
/// Side of a clutter speck. Large enough to survive the median stage, so the
/// independence filter has scattered clutter to deal with.
const SPECK: usize = 3;

fn render(scene: &Scene, seed: RandomSeed) -> Result<CorpusItem> {
    let n = SIZE;
    // topmost shape owns a pixel; coverage is the logistic of the distance
    let mut planes = vec![vec![0.0; n * n]; 3];
    let mut mask = vec![false; n * n];
    for y in 0..n {
        for x in 0..n {
            let i = y * n + x;
            let mut color = scene.background;
            for (shape, c) in &scene.shapes {
                let d = shape.sdf(x as f64, y as f64);
                let cover = 1.0 / (1.0 + (d / SOFTNESS * 1.7).exp());
                for ch in 0..3 {
                    color[ch] += (c[ch] - color[ch]) * cover;
                }
                if d < 0.0 {
                    mask[i] = true;
                }
            }
            for ch in 0..3 {
                planes[ch][i] = color[ch];
            }
        }
    }
    let gt = BinaryEdgeMap::from_fn(n, n, |x, y| {
        let inside = |x: isize, y: isize| {
            x < 0 || y < 0 || x >= n as isize || y >= n as isize || mask[y as usize * n + x as usize]
        };
        let (xi, yi) = (x as isize, y as isize);
        mask[y * n + x] && !(inside(xi - 1, yi) && inside(xi + 1, yi) && inside(xi, yi - 1) && inside(xi, yi + 1))
    })?;
    let img = MultiChannelImage::new(
        planes
            .into_iter()
            .map(|d| ImagePlane::new(n, n, d))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let spec = NoiseSpec {
        kind: NoiseKind::Gaussian,
        level: SENSOR_SIGMA,
        seed: seed.derive(0),
    };
    let noisy = add_noise_image(&img, &spec)?;
    let mut planes: Vec<Vec<f64>> = noisy.channels().iter().map(|p| p.data().to_vec()).collect();
    let mut rng = seed.derive(1).rng();
    for _ in 0..SPECKS {
        let (sx, sy) = (rng.random_range(0..n - SPECK), rng.random_range(0..n - SPECK));
        let v: f64 = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
        for y in sy..sy + SPECK {
            for p in &mut planes {
                p[y * n + sx..y * n + sx + SPECK].fill(v);
            }
        }
    }
    let img = MultiChannelImage::new(
        planes
            .into_iter()
            .map(|d| ImagePlane::new(n, n, d))
            .collect::<Result<Vec<_>>>()?,
    )?;
    CorpusItem::new(scene.name, img, gt)
}

/// The five-image benchmark corpus. Equal seeds give identical corpora.
pub fn mini_corpus(seed: RandomSeed) -> Result<Vec<CorpusItem>> {
    scenes()
        .iter()
        .enumerate()
        .map(|(i, s)| render(s, seed.derive(100 + i as u64)))
        .collect()
}

/// Seed of the corpus shipped under `data/mini-corpus`.
pub const CORPUS_SEED: RandomSeed = RandomSeed(2024);

/// Writes `<name>.ppm` and `<name>.gt.pgm` for every item.
pub fn write_corpus(dir: impl AsRef<std::path::Path>, corpus: &[CorpusItem]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| crate::error::Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    for item in corpus {
        crate::io::save_raster(dir.join(format!("{}.ppm", item.name)), &item.image)?;
        crate::io::save_edge_map(dir.join(format!("{}.gt.pgm", item.name)), &item.gt)?;
    }
    Ok(())
}

/// A 45-degree line of `len` pixels starting at `(x0, y0)`.
pub fn diagonal_line(width: usize, height: usize, x0: usize, y0: usize, len: usize) -> Result<BinaryEdgeMap> {
    BinaryEdgeMap::from_fn(width, height, |x, y| x >= x0 && x - x0 < len && y >= y0 && x - x0 == y - y0)
}

/// `count` distinct pixels drawn uniformly at random.
pub fn scattered_points(width: usize, height: usize, count: usize, seed: RandomSeed) -> Result<BinaryEdgeMap> {
    let mut rng = seed.rng();
    let idx = rand::seq::index::sample(&mut rng, width * height, count.min(width * height));
    let mut bits = vec![false; width * height];
    for i in idx.iter() {
        bits[i] = true;
    }
    BinaryEdgeMap::new(width, height, bits)
}
