use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::image::{ensure_same_dims, BinaryEdgeMap, ImagePlane};

/// Peak sample value of 8-bit rasters.
pub const PEAK: f64 = 255.0;

/// Mean squared error on the 0-255 scale.
pub fn mse(pred: &ImagePlane, reference: &ImagePlane) -> Result<f64> {
    pred.same_dims(reference)?;
    let sum: f64 = pred
        .data()
        .iter()
        .zip(reference.data())
        .map(|(&p, &r)| {
            let d = PEAK * (p - r);
            d * d
        })
        .sum();
    Ok(sum / pred.data().len() as f64)
}

/// `10 log10(255^2 / MSE)`; infinite when the images agree exactly.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    }
}

pub fn psnr(pred: &ImagePlane, reference: &ImagePlane) -> Result<f64> {
    Ok(psnr_from_mse(mse(pred, reference)?))
}

pub(crate) fn serialize_db<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

/// Matching counts and the derived scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryScore {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl BoundaryScore {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        // an empty side is vacuously perfect
        let precision = if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 };
        let f_measure = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f_measure,
        }
    }
}

/// Maximum one-to-one matching of predicted to ground-truth edge pixels
/// within Euclidean distance `tol`.
///
/// Predictions are visited in raster order and first take the nearest free
/// ground-truth pixel (ties by raster order); augmenting paths then grow the
/// matching to maximum cardinality, so the count does not depend on which
/// map is called the prediction.
pub fn f_measure(pred: &BinaryEdgeMap, gt: &BinaryEdgeMap, tol: f64) -> Result<BoundaryScore> {
    ensure_same_dims(pred.dims(), gt.dims())?;
    let (w, h) = gt.dims();
    let pred_pts = pred.coords();
    let gt_pts = gt.coords();
    let mut gt_index = vec![usize::MAX; w * h];
    for (i, p) in gt_pts.points().iter().enumerate() {
        gt_index[p.y * w + p.x] = i;
    }
    let r = if tol >= 0.0 { tol.floor() as isize } else { -1 };
    let tol2 = tol * tol;

    // candidate lists sorted by (distance, raster order)
    let adj: Vec<Vec<usize>> = pred_pts
        .points()
        .iter()
        .map(|p| {
            let mut cands = Vec::new();
            for dy in -r..=r {
                for dx in -r..=r {
                    let (x, y) = (p.x as isize + dx, p.y as isize + dy);
                    if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
                        continue;
                    }
                    let d2 = (dx * dx + dy * dy) as f64;
                    let g = gt_index[y as usize * w + x as usize];
                    if g != usize::MAX && d2 <= tol2 {
                        cands.push((dx * dx + dy * dy, g));
                    }
                }
            }
            cands.sort_unstable();
            cands.into_iter().map(|(_, g)| g).collect()
        })
        .collect();

    let mut owner = vec![usize::MAX; gt_pts.len()];
    let mut mate = vec![usize::MAX; pred_pts.len()];
    for (u, cands) in adj.iter().enumerate() {
        if let Some(&g) = cands.iter().find(|&&g| owner[g] == usize::MAX) {
            owner[g] = u;
            mate[u] = g;
        }
    }
    let mut seen = vec![0usize; gt_pts.len()];
    let mut stamp = 0;
    for u in 0..pred_pts.len() {
        if mate[u] == usize::MAX && !adj[u].is_empty() {
            stamp += 1;
            augment(u, &adj, &mut owner, &mut mate, &mut seen, stamp);
        }
    }
    let tp = mate.iter().filter(|&&m| m != usize::MAX).count();
    Ok(BoundaryScore::from_counts(tp, pred_pts.len() - tp, gt_pts.len() - tp))
}

/// Iterative augmenting-path search from a free prediction.
fn augment(
    root: usize,
    adj: &[Vec<usize>],
    owner: &mut [usize],
    mate: &mut [usize],
    seen: &mut [usize],
    stamp: usize,
) -> bool {
    // stack of (prediction, next candidate index); each entry above the root
    // was reached through the ground-truth pixel it currently owns
    let mut stack = vec![(root, 0usize)];
    while let Some(&mut (u, ref mut next)) = stack.last_mut() {
        if *next >= adj[u].len() {
            stack.pop();
            continue;
        }
        let g = adj[u][*next];
        *next += 1;
        if seen[g] == stamp {
            continue;
        }
        seen[g] = stamp;
        if owner[g] == usize::MAX {
            // flip the path root -> ... -> u -> g
            let mut g = g;
            for &(p, _) in stack.iter().rev() {
                let prev = mate[p];
                mate[p] = g;
                owner[g] = p;
                g = prev;
            }
            return true;
        }
        stack.push((owner[g], 0));
    }
    false
}

/// Everything reported for one prediction against its reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub mse: f64,
    #[serde(serialize_with = "serialize_db")]
    pub psnr_db: f64,
    pub precision: f64,
    pub recall: f64,
    #[serde(rename = "f")]
    pub f_measure: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl MetricsReport {
    pub fn new(mse: f64, score: BoundaryScore) -> Self {
        Self {
            mse,
            psnr_db: psnr_from_mse(mse),
            precision: score.precision,
            recall: score.recall,
            f_measure: score.f_measure,
            tp: score.tp,
            fp: score.fp,
            fn_: score.fn_,
        }
    }
}

/// Compares a detected edge map against a ground-truth edge map.
pub fn evaluate(pred: &BinaryEdgeMap, gt: &BinaryEdgeMap, tol: f64) -> Result<MetricsReport> {
    let score = f_measure(pred, gt, tol)?;
    let err = mse(&pred.to_plane(), &gt.to_plane())?;
    Ok(MetricsReport::new(err, score))
}

/// Fallback when no ground truth exists: MSE/PSNR of the edge map against the
/// grayscale input. Boundary scores are not meaningful and are reported as 0.
pub fn evaluate_against_image(pred: &BinaryEdgeMap, gray: &ImagePlane) -> Result<MetricsReport> {
    let err = mse(&pred.to_plane(), gray)?;
    Ok(MetricsReport {
        mse: err,
        psnr_db: psnr_from_mse(err),
        precision: 0.0,
        recall: 0.0,
        f_measure: 0.0,
        tp: 0,
        fp: 0,
        fn_: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(w: usize, h: usize, row: usize, from: usize, len: usize) -> BinaryEdgeMap {
        BinaryEdgeMap::from_fn(w, h, |x, y| y == row && (from..from + len).contains(&x)).unwrap()
    }

    #[test]
    fn mse_cases() {
        let a = ImagePlane::filled(4, 3, 0.2).unwrap();
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let b = a.map(|v| v + 1.0 / 255.0).unwrap();
        assert!((mse(&a, &b).unwrap() - 1.0).abs() < 1e-9);
        let zero = ImagePlane::filled(4, 3, 0.0).unwrap();
        let one = ImagePlane::filled(4, 3, 1.0).unwrap();
        assert_eq!(mse(&zero, &one).unwrap(), 65025.0);
        assert_eq!(psnr(&zero, &one).unwrap(), 0.0);
        assert!(mse(&zero, &ImagePlane::filled(3, 4, 0.0).unwrap()).is_err());
    }

    #[test]
    fn psnr_at_40_db() {
        assert!((psnr_from_mse(6.5025) - 40.0).abs() < 1e-9);
    }

    #[test]
    fn identical_and_empty_maps() {
        let gt = line(20, 5, 2, 3, 10);
        let s = f_measure(&gt, &gt, 2.0).unwrap();
        assert_eq!((s.precision, s.recall, s.f_measure), (1.0, 1.0, 1.0));
        let empty = BinaryEdgeMap::empty(20, 5).unwrap();
        let s = f_measure(&empty, &gt, 2.0).unwrap();
        assert_eq!((s.recall, s.f_measure), (0.0, 0.0));
        let s = f_measure(&empty, &empty, 2.0).unwrap();
        assert_eq!((s.precision, s.recall, s.f_measure), (1.0, 1.0, 1.0));
    }

    #[test]
    fn shifted_line_tolerance() {
        let gt = line(20, 5, 2, 3, 10);
        let pred = line(20, 5, 3, 3, 10);
        assert_eq!(f_measure(&pred, &gt, 2.0).unwrap().f_measure, 1.0);
        assert_eq!(f_measure(&pred, &gt, 0.0).unwrap().f_measure, 0.0);
    }

    #[test]
    fn augmenting_beats_greedy() {
        // greedy from the gt side would match only one pixel here
        let pred = BinaryEdgeMap::from_fn(5, 1, |x, _| x == 1 || x == 2).unwrap();
        let gt = BinaryEdgeMap::from_fn(5, 1, |x, _| x == 2 || x == 3).unwrap();
        assert_eq!(f_measure(&pred, &gt, 1.0).unwrap().tp, 2);
        assert_eq!(f_measure(&gt, &pred, 1.0).unwrap().tp, 2);
    }

    #[test]
    fn report_serializes_inf() {
        let gt = line(8, 3, 1, 0, 8);
        let r = evaluate(&gt, &gt, 2.0).unwrap();
        let json = serde_json::to_value(r).unwrap();
        assert_eq!(json["psnr_db"], "inf");
        assert_eq!(json["f"], 1.0);
        assert_eq!(json["fn"], 0);
    }

    fn arb_map() -> impl Strategy<Value = BinaryEdgeMap> {
        proptest::collection::vec(proptest::bool::weighted(0.15), 16 * 12)
            .prop_map(|b| BinaryEdgeMap::new(16, 12, b).unwrap())
    }

    fn sparse_map() -> impl Strategy<Value = BinaryEdgeMap> {
        proptest::collection::vec(proptest::bool::weighted(0.04), 16 * 12)
            .prop_map(|b| BinaryEdgeMap::new(16, 12, b).unwrap())
    }

    fn far_from(map: &BinaryEdgeMap, x: usize, y: usize, tol: f64) -> bool {
        map.coords()
            .points()
            .iter()
            .all(|p| (p.x as f64 - x as f64).hypot(p.y as f64 - y as f64) > tol)
    }

    proptest! {
        #[test]
        fn swap_symmetry(p in arb_map(), g in arb_map(), tol in 0.0f64..3.0) {
            let a = f_measure(&p, &g, tol).unwrap();
            let b = f_measure(&g, &p, tol).unwrap();
            prop_assert_eq!(a.tp, b.tp);
            prop_assert!((a.precision - b.recall).abs() < 1e-15);
            prop_assert!((a.f_measure - b.f_measure).abs() < 1e-15);
        }

        #[test]
        fn harmonic_identity(p in arb_map(), g in arb_map()) {
            let s = f_measure(&p, &g, 2.0).unwrap();
            if s.precision + s.recall > 0.0 {
                let f = 2.0 * s.precision * s.recall / (s.precision + s.recall);
                prop_assert!((s.f_measure - f).abs() < 1e-12);
            }
        }

        #[test]
        fn spurious_prediction_never_helps_precision(p in sparse_map(), g in sparse_map(), x in 0usize..16, y in 0usize..12) {
            prop_assume!(far_from(&g, x, y, 2.0) && !p.get(x, y));
            let mut p2 = p.clone();
            p2.set(x, y, true);
            prop_assert!(f_measure(&p2, &g, 2.0).unwrap().precision <= f_measure(&p, &g, 2.0).unwrap().precision);
        }

        // a ground-truth pixel within reach of an unmatched prediction can
        // raise recall, so the added pixel is kept out of reach
        #[test]
        fn extra_ground_truth_never_helps_recall(p in sparse_map(), g in sparse_map(), x in 0usize..16, y in 0usize..12) {
            prop_assume!(far_from(&p, x, y, 2.0) && !g.get(x, y));
            let mut g2 = g.clone();
            g2.set(x, y, true);
            prop_assert!(f_measure(&p, &g2, 2.0).unwrap().recall <= f_measure(&p, &g, 2.0).unwrap().recall);
        }

        #[test]
        fn psnr_mse_identity(a in proptest::collection::vec(0.0f64..1.0, 20), b in proptest::collection::vec(0.0f64..1.0, 20)) {
            let pa = ImagePlane::new(5, 4, a).unwrap();
            let pb = ImagePlane::new(5, 4, b).unwrap();
            let m = mse(&pa, &pb).unwrap();
            prop_assume!(m > 0.0);
            prop_assert!((psnr(&pa, &pb).unwrap() - 10.0 * (255.0f64 * 255.0 / m).log10()).abs() < 1e-9);
        }
    }
}
