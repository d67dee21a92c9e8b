use cam_edit_core::eval::{add_noise_image, psnr, NoiseKind, NoiseSpec};
use cam_edit_core::pipeline::{detect, detect_staged, run_from_fused, run_from_magnitude, run_from_membership, run_from_pre_edit};
use cam_edit_core::refine::dilate;
use cam_edit_core::synth::{mini_corpus, CORPUS_SEED};
use cam_edit_core::{BinaryEdgeMap, ImagePlane, MultiChannelImage, PipelineConfig, RandomSeed};

fn rgb(p: ImagePlane) -> MultiChannelImage {
    MultiChannelImage::new(vec![p.clone(), p.clone(), p]).unwrap()
}

fn distance_to(map: &BinaryEdgeMap, x: usize, y: usize) -> f64 {
    map.coords()
        .points()
        .iter()
        .map(|p| (p.x as f64 - x as f64).hypot(p.y as f64 - y as f64))
        .fold(f64::INFINITY, f64::min)
}

fn square_outline() -> BinaryEdgeMap {
    BinaryEdgeMap::from_fn(64, 64, |x, y| {
        let inside = (16..48).contains(&x) && (16..48).contains(&y);
        inside && (x == 16 || x == 47 || y == 16 || y == 47)
    })
    .unwrap()
}

#[test]
fn white_square_edges_hug_the_outline() {
    let sq = ImagePlane::from_fn(64, 64, |x, y| {
        if (16..48).contains(&x) && (16..48).contains(&y) { 1.0 } else { 0.0 }
    })
    .unwrap();
    let out = detect(&rgb(sq), &PipelineConfig::default()).unwrap();
    let outline = square_outline();
    let grown = dilate(&dilate(&outline));
    assert!(out.is_subset_of(&grown));
    for p in out.coords().points() {
        assert!(distance_to(&outline, p.x, p.y) <= 2.0);
    }
}

#[test]
fn soft_square_band_stays_near_outline() {
    let sq = ImagePlane::from_fn(64, 64, |x, y| {
        let d = (x as f64 - 31.5).abs().max((y as f64 - 31.5).abs()) - 16.0;
        1.0 / (1.0 + (d * 1.7).exp())
    })
    .unwrap();
    let out = detect(&rgb(sq), &PipelineConfig::default()).unwrap();
    assert!(out.count() > 100);
    // the blurred transition is several pixels wide; corners spread diagonally
    assert!(out.is_subset_of(&dilate(&dilate(&dilate(&square_outline())))));
}

#[test]
fn resuming_from_any_stage_is_exact() {
    let corpus = mini_corpus(CORPUS_SEED).unwrap();
    let cfg = PipelineConfig::default();
    for item in &corpus[..2] {
        let s = detect_staged(&item.image, &cfg).unwrap();
        assert_eq!(run_from_fused(&s.fused, &cfg).unwrap(), s.edges);
        assert_eq!(run_from_magnitude(&s.gradient.mag, &cfg).unwrap(), s.edges);
        assert_eq!(run_from_membership(&s.membership, &cfg).unwrap(), s.edges);
        assert_eq!(run_from_pre_edit(&s.pre_edit, &cfg).unwrap(), s.edges);
    }
}

#[test]
fn detection_is_deterministic() {
    let corpus = mini_corpus(CORPUS_SEED).unwrap();
    let cfg = PipelineConfig::default();
    for item in &corpus {
        assert_eq!(detect(&item.image, &cfg).unwrap(), detect(&item.image, &cfg).unwrap());
    }
}

#[test]
fn median_kernel_trend_on_noisy_fixture() {
    let item = &mini_corpus(CORPUS_SEED).unwrap()[0];
    let spec = NoiseSpec { kind: NoiseKind::SaltPepper, level: 0.02, seed: RandomSeed(3) };
    let noisy = add_noise_image(&item.image, &spec).unwrap();
    let score = |k: usize| {
        let mut cfg = PipelineConfig::default();
        cfg.refine.median_kernel = k;
        let out = detect(&noisy, &cfg).unwrap();
        psnr(&out.to_plane(), &item.gt.to_plane()).unwrap()
    };
    assert!(score(5) >= score(1));
}
