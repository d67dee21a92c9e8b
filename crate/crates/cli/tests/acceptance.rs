//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use cam_edit_core::edit::{edit_filter, EditConfig};
use cam_edit_core::eval::bench::{bench, bench_with, sobel_baseline, BASELINE_THRESHOLD};
use cam_edit_core::eval::{f_measure, mse, psnr, NoiseKind, NoiseSpec};
use cam_edit_core::gradient::{membership, sigmoid_membership, Inflection, MembershipConfig};
use cam_edit_core::refine::{apply_morphology, dilate, erode, MorphOrder};
use cam_edit_core::stats::{build_table, fisher_point_probability, independence_test, ContingencyTable, TestConfig, TestMethod};
use cam_edit_core::synth::{diagonal_line, mini_corpus, scattered_points, write_corpus, CORPUS_SEED};
use cam_edit_core::{BinaryEdgeMap, ImagePlane, PipelineConfig, Pixel, RandomSeed};
use cam_edit_oracles as oracle;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fisher_worked_example() -> Outcome {
    let t = ContingencyTable::new(83, 0, 89, 10);
    let start = Instant::now();
    let r = independence_test(&t, &TestConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let p = fisher_point_probability(&t);
    let pass = (0.0015..=0.0025).contains(&p)
        && r.method == TestMethod::Fisher
        && r.dependent
        && elapsed < Duration::from_millis(1);
    outcome(pass, format!("p = {p:.6}, dependent = {}, {elapsed:?}", r.dependent))
}

fn chi_square_worked_example() -> Outcome {
    let t = ContingencyTable::new(21, 24, 21, 15);
    let r = independence_test(&t, &TestConfig::default()).unwrap();
    let want_p = oracle::chi_square_sf_df1(oracle::chi_square_statistic(21, 24, 21, 15));
    let pass = r.method == TestMethod::ChiSquare
        && (r.statistic - 1.0904).abs() < 1e-3
        && (r.p - want_p).abs() < 1e-6
        && !r.dependent;
    outcome(
        pass,
        format!("chi2 = {:.5}, p = {:.7} (reference {want_p:.7}), dependent = {}", r.statistic, r.p, r.dependent),
    )
}

fn hypergeometric_normalization() -> Outcome {
    let mut rng = RandomSeed(901).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let r1 = rng.random_range(0..=30u64);
        let r2 = rng.random_range(0..=30u64);
        let c1 = rng.random_range(0..=(r1 + r2).min(30));
        let tables = oracle::enumerate_tables(r1, r2, c1).unwrap();
        let exact: f64 = tables.iter().map(|(_, p)| p).sum();
        let ours: f64 = tables
            .iter()
            .map(|&((a, b, c, d), _)| fisher_point_probability(&ContingencyTable::new(a, b, c, d)))
            .sum();
        worst = worst.max((exact - 1.0).abs()).max((ours - 1.0).abs());
    }
    outcome(worst < 1e-10, format!("max |sum - 1| = {worst:.2e} over 50 margin sets"))
}

fn displacement_example() -> Outcome {
    let d = Pixel::new(2, 3).displacement(Pixel::new(1, 1));
    let line: Vec<Pixel> = (0..14).map(|i| Pixel::new(i, i)).collect();
    let n = build_table(&line, 3).unwrap().total();
    outcome(d == (1, 2) && n == 182, format!("(|dx|, |dy|) = {d:?}, n = {n}"))
}

fn edit_on_synthetics() -> Outcome {
    let cfg = EditConfig::default();
    let line = diagonal_line(200, 200, 60, 60, 80).unwrap();
    let noise = scattered_points(200, 200, 40, RandomSeed(77)).unwrap();
    let mixed = BinaryEdgeMap::from_fn(200, 200, |x, y| line.get(x, y) || noise.get(x, y)).unwrap();
    let mut slowest = Duration::ZERO;
    let mut run = |m: &BinaryEdgeMap| {
        let start = Instant::now();
        let out = edit_filter(m, &cfg).unwrap();
        slowest = slowest.max(start.elapsed());
        out
    };
    let (line_out, noise_out, mixed_out) = (run(&line), run(&noise), run(&mixed));
    let retained = line_out.count() as f64 / line.count() as f64;
    let removed = 1.0 - noise_out.count() as f64 / noise.count() as f64;
    let replay = |m: &BinaryEdgeMap| {
        oracle::edit_replay(m.bits(), 200, 200, cfg.window, cfg.stride, cfg.k as i64, cfg.alpha, cfg.min_points)
    };
    let agree = line_out.bits() == replay(&line).as_slice()
        && noise_out.bits() == replay(&noise).as_slice()
        && mixed_out.bits() == replay(&mixed).as_slice();
    let pass = retained >= 0.9 && removed >= 0.8 && agree && slowest < Duration::from_secs(2);
    outcome(
        pass,
        format!(
            "line retained {:.1}%, noise removed {:.1}%, replay agrees = {agree}, slowest {slowest:?}",
            retained * 100.0,
            removed * 100.0
        ),
    )
}

fn membership_identities() -> Outcome {
    let x0 = 0.37;
    let at_center = sigmoid_membership(x0, 5.0, x0);
    let one_up = sigmoid_membership(x0 + 1.0, 5.0, x0);
    let mut rng = RandomSeed(606).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d: f64 = rng.random_range(-10.0..10.0);
        worst = worst.max((sigmoid_membership(x0 - d, 5.0, x0) + sigmoid_membership(x0 + d, 5.0, x0) - 1.0).abs());
    }
    // the plane-level path at an explicit inflection point
    let plane = ImagePlane::new(3, 1, vec![x0 - 1.0, x0, x0 + 1.0]).unwrap();
    let mu = membership(&plane, &MembershipConfig { k: 5.0, x0: Inflection::Value(x0) }).unwrap();
    let pass = at_center == 0.5
        && (one_up - 0.99331).abs() < 1e-5
        && worst < 1e-12
        && mu.data()[1] == 0.5
        && (mu.data()[2] - 0.99331).abs() < 1e-5;
    outcome(pass, format!("mu(x0) = {at_center}, mu(x0+1) = {one_up:.6}, worst symmetry error {worst:.1e}"))
}

fn random_map(rng: &mut impl Rng, w: usize, h: usize, density: f64) -> BinaryEdgeMap {
    BinaryEdgeMap::from_fn(w, h, |_, _| rng.random_bool(density)).unwrap()
}

fn metric_identities() -> Outcome {
    let mut rng = RandomSeed(707).rng();
    let a = ImagePlane::from_fn(16, 16, |_, _| rng.random::<f64>()).unwrap();
    let same = mse(&a, &a).unwrap() == 0.0 && psnr(&a, &a).unwrap() == f64::INFINITY;
    let mut psnr_err: f64 = 0.0;
    let mut f_err: f64 = 0.0;
    for _ in 0..20 {
        let p = ImagePlane::from_fn(16, 16, |_, _| rng.random::<f64>()).unwrap();
        let q = ImagePlane::from_fn(16, 16, |_, _| rng.random::<f64>()).unwrap();
        let m = mse(&p, &q).unwrap();
        psnr_err = psnr_err.max((10.0 * (255.0f64 * 255.0 / m).log10() - psnr(&p, &q).unwrap()).abs());
        let pm = random_map(&mut rng, 24, 24, 0.1);
        let gm = random_map(&mut rng, 24, 24, 0.1);
        let s = f_measure(&pm, &gm, 2.0).unwrap();
        if s.precision + s.recall > 0.0 {
            let f = 2.0 * s.precision * s.recall / (s.precision + s.recall);
            f_err = f_err.max((f - s.f_measure).abs());
        }
    }
    let pass = same && psnr_err < 1e-9 && f_err < 1e-12;
    outcome(pass, format!("identical images ok = {same}, psnr error {psnr_err:.1e}, F error {f_err:.1e}"))
}

fn morphology_algebra() -> Outcome {
    let mut rng = RandomSeed(808).rng();
    let mut failures = 0;
    for _ in 0..100 {
        let density = rng.random_range(0.05..0.6);
        let m = random_map(&mut rng, 32, 32, density);
        let closed = apply_morphology(&m, MorphOrder::Close);
        let ok = m.is_subset_of(&dilate(&m))
            && erode(&m).is_subset_of(&m)
            && apply_morphology(&closed, MorphOrder::Close) == closed;
        if !ok {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("{failures} of 100 maps violate an identity"))
}

fn corpus_comparison() -> Outcome {
    let start = Instant::now();
    let corpus = mini_corpus(CORPUS_SEED).unwrap();
    let cfg = PipelineConfig::default();
    let full = bench(&corpus, &cfg).unwrap().mean.f_measure;
    let no_edit = bench(&corpus, &cfg.clone().without_edit()).unwrap().mean.f_measure;
    let no_median = bench(&corpus, &cfg.clone().without_median()).unwrap().mean.f_measure;
    let baseline = bench_with(&corpus, None, cfg.tolerance, "sobel", serde_json::Value::Null, |img| {
        sobel_baseline(img, BASELINE_THRESHOLD)
    })
    .unwrap()
    .mean
    .f_measure;
    let elapsed = start.elapsed();
    let pass = full >= baseline && no_edit <= full && no_median <= full && elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "F full {full:.4}, sobel baseline {baseline:.4}, no-edit {no_edit:.4}, no-median {no_median:.4}, {elapsed:?}"
        ),
    )
}

fn noise_robustness() -> Outcome {
    let corpus = mini_corpus(CORPUS_SEED).unwrap();
    let clean_cfg = PipelineConfig::default();
    let clean = bench(&corpus, &clean_cfg).unwrap().mean.f_measure;
    let mut noisy_cfg = clean_cfg.clone();
    noisy_cfg.noise = Some(NoiseSpec { kind: NoiseKind::SaltPepper, level: 0.10, seed: RandomSeed(1010) });
    let first = bench(&corpus, &noisy_cfg).unwrap();
    let second = bench(&corpus, &noisy_cfg).unwrap();
    let noisy = first.mean.f_measure;
    let deterministic = first.to_json() == second.to_json();
    let gap = (clean - noisy).abs();
    outcome(
        gap <= 0.15 && deterministic,
        format!("F clean {clean:.4}, F at 10% salt-and-pepper {noisy:.4}, gap {gap:.4}, deterministic = {deterministic}"),
    )
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let corpus = mini_corpus(CORPUS_SEED).unwrap();
    write_corpus(dir.path(), &corpus).unwrap();
    let bin = env!("CARGO_BIN_EXE_cam-edit");
    let mut compared = 0;
    let mut identical = true;
    for item in &corpus {
        let input = dir.path().join(format!("{}.ppm", item.name));
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{}.run{run}.pgm", item.name));
            let status = Command::new(bin)
                .args(["detect", "--input"])
                .arg(&input)
                .arg("--output")
                .arg(&out)
                .env_remove("CAM_EDIT_CONFIG")
                .status()
                .unwrap();
            if !status.success() {
                return outcome(false, format!("detect exited with {status} on {}", item.name));
            }
            outputs.push(std::fs::read(&out).unwrap());
        }
        identical &= outputs[0] == outputs[1];
        compared += 1;
    }
    outcome(identical, format!("{compared} fixtures, byte-identical = {identical}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("Fisher worked example", fisher_worked_example),
        ("chi-square worked example", chi_square_worked_example),
        ("hypergeometric normalization", hypergeometric_normalization),
        ("displacement example", displacement_example),
        ("EDIT on synthetic fixtures", edit_on_synthetics),
        ("membership identities", membership_identities),
        ("metric identities", metric_identities),
        ("morphology algebra", morphology_algebra),
        ("mini-corpus comparison and ablations", corpus_comparison),
        ("salt-and-pepper robustness", noise_robustness),
        ("end-to-end determinism", cli_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        let o = check();
        println!("criterion {n:>2}: {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("all {} criteria pass", criteria.len());
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
