use rayon::prelude::*;

use crate::image::ImagePlane;

/// A small dense kernel applied by correlation (no flip).
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub width: usize,
    pub height: usize,
    /// Kernel cell placed over the output pixel.
    pub anchor: (usize, usize),
    pub weights: Vec<f64>,
}

impl Kernel {
    /// 3x3 kernel anchored at its center, rows top to bottom.
    pub fn centered3(rows: [[f64; 3]; 3]) -> Self {
        Self {
            width: 3,
            height: 3,
            anchor: (1, 1),
            weights: rows.iter().flatten().copied().collect(),
        }
    }

    /// 2x2 kernel anchored at its top-left cell.
    pub fn top_left2(rows: [[f64; 2]; 2]) -> Self {
        Self {
            width: 2,
            height: 2,
            anchor: (0, 0),
            weights: rows.iter().flatten().copied().collect(),
        }
    }
}

/// Correlation with replicate padding. Per pixel, taps are accumulated row by
/// row, left to right, starting from zero.
pub fn correlate(img: &ImagePlane, kernel: &Kernel) -> ImagePlane {
    let (w, h) = img.dims();
    let (ax, ay) = (kernel.anchor.0 as isize, kernel.anchor.1 as isize);
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, o) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..kernel.height {
                let sy = y as isize + j as isize - ay;
                for i in 0..kernel.width {
                    let sx = x as isize + i as isize - ax;
                    acc += kernel.weights[j * kernel.width + i] * img.get_clamped(sx, sy);
                }
            }
            *o = acc;
        }
    });
    ImagePlane::from_parts(w, h, out)
}
