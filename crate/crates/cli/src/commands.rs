use std::fmt::Write as _;
use std::path::Path;

use cam_edit_core::edit::format_decisions;
use cam_edit_core::eval::bench::{bench, bench_with, load_corpus, sobel_baseline, BenchReport, CorpusItem};
use cam_edit_core::eval::{add_noise_image, evaluate, evaluate_against_image, NoiseSpec};
use cam_edit_core::io::{
    load_edge_map, load_f64_plane, load_raster, save_edge_map, save_f64_plane, save_plane, save_raster,
};
use cam_edit_core::pipeline::{detect_staged, run_from_fused, run_from_magnitude, run_from_membership, run_from_pre_edit};
use cam_edit_core::synth::{mini_corpus, write_corpus, CORPUS_SEED};
use cam_edit_core::{to_grayscale, Error, ImagePlane, PipelineConfig, RandomSeed};
use serde::Serialize;

use crate::args::{
    BenchArgs, Command, Detector, DetectArgs, EvalArgs, MakeCorpusArgs, NoiseArgs, PipelineArgs, StartStage, SweepArgs,
};

pub enum Failure {
    Usage(String),
    Processing(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Processing(e)
    }
}

type Outcome = Result<(), Failure>;

fn config(p: &PipelineArgs) -> Result<PipelineConfig, Failure> {
    p.resolve().map_err(|e| match e {
        Error::Io { .. } => Failure::Processing(e),
        other => Failure::Usage(other.to_string()),
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Detect(a) => detect(a),
        Command::Eval(a) => eval(a),
        Command::Noise(a) => noise(a),
        Command::Bench(a) => run_bench(a),
        Command::SweepMedian(a) => sweep_median(a),
        Command::MakeCorpus(a) => make_corpus(a),
    }
}

/// Scales a non-negative plane into `[0, 1]` for viewing.
fn preview(plane: &ImagePlane) -> Result<ImagePlane, Error> {
    let (_, max) = plane.min_max();
    let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
    plane.map(|v| (v * scale).clamp(0.0, 1.0))
}

fn detect(a: DetectArgs) -> Outcome {
    let cfg = config(&a.pipeline)?;
    if a.start_stage.is_some() && (a.dump_intermediate.is_some() || a.dump_decisions.is_some()) {
        return Err(Failure::Usage("--start-stage cannot be combined with dumps".into()));
    }
    if let Some(stage) = a.start_stage {
        let edges = match stage {
            StartStage::Fused => run_from_fused(&load_f64_plane(&a.input)?, &cfg)?,
            StartStage::Magnitude => run_from_magnitude(&load_f64_plane(&a.input)?, &cfg)?,
            StartStage::Membership => run_from_membership(&load_f64_plane(&a.input)?, &cfg)?,
            StartStage::PreEdit => run_from_pre_edit(&load_edge_map(&a.input)?, &cfg)?,
        };
        save_edge_map(&a.output, &edges)?;
        return Ok(());
    }
    let mut img = load_raster(&a.input)?;
    if let Some(spec) = &cfg.noise {
        img = add_noise_image(&img, spec)?;
    }
    let s = detect_staged(&img, &cfg)?;
    save_edge_map(&a.output, &s.edges)?;
    if let Some(dir) = &a.dump_intermediate {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        save_f64_plane(dir.join("fused.f64"), &s.fused)?;
        save_plane(dir.join("fused.pgm"), &s.fused.map(|v| v.clamp(0.0, 1.0))?)?;
        save_f64_plane(dir.join("magnitude.f64"), &s.gradient.mag)?;
        save_plane(dir.join("magnitude.pgm"), &preview(&s.gradient.mag)?)?;
        save_f64_plane(dir.join("membership.f64"), &s.membership)?;
        save_plane(dir.join("membership.pgm"), &s.membership)?;
        save_edge_map(dir.join("pre_edit.pgm"), &s.pre_edit)?;
        save_edge_map(dir.join("post_edit.pgm"), &s.edges)?;
    }
    if let Some(path) = &a.dump_decisions {
        write_text(path, &format_decisions(&s.decisions))?;
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Outcome {
    if !(a.tolerance >= 0.0 && a.tolerance.is_finite()) {
        return Err(Failure::Usage(format!("--tolerance must be >= 0, got {}", a.tolerance)));
    }
    let pred = load_edge_map(&a.pred)?;
    let report = match (&a.gt, &a.input) {
        (Some(gt), _) => evaluate(&pred, &load_edge_map(gt)?, a.tolerance)?,
        (None, Some(input)) => {
            eprintln!("warning: no ground truth given; MSE/PSNR are against the grayscale input and P/R/F are 0");
            evaluate_against_image(&pred, &to_grayscale(&load_raster(input)?)?)?
        }
        (None, None) => return Err(Failure::Usage("eval needs --gt or --input".into())),
    };
    let json = serde_json::to_string_pretty(&report).expect("report is plain data");
    match &a.json {
        Some(path) => write_text(path, &json)?,
        None => println!("{json}"),
    }
    Ok(())
}

fn noise(a: NoiseArgs) -> Outcome {
    let spec = NoiseSpec {
        kind: a.noise,
        level: a.noise_level,
        seed: RandomSeed(a.seed),
    };
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let img = load_raster(&a.input)?;
    save_raster(&a.output, &add_noise_image(&img, &spec)?)?;
    Ok(())
}

fn print_report(r: &BenchReport) {
    println!("{:<12} {:>10} {:>9} {:>9} {:>9} {:>9}", "name", "mse", "psnr_db", "precision", "recall", "f");
    for row in &r.rows {
        let m = &row.metrics;
        println!(
            "{:<12} {:>10.4} {:>9.3} {:>9.4} {:>9.4} {:>9.4}",
            row.name, m.mse, m.psnr_db, m.precision, m.recall, m.f_measure
        );
    }
    let m = &r.mean;
    println!(
        "{:<12} {:>10.4} {:>9.3} {:>9.4} {:>9.4} {:>9.4}",
        "mean", m.mse, m.psnr_db, m.precision, m.recall, m.f_measure
    );
}

fn run_bench(a: BenchArgs) -> Outcome {
    let cfg = config(&a.pipeline)?;
    let corpus: Vec<CorpusItem> = match &a.corpus {
        Some(dir) => load_corpus(dir)?,
        None => mini_corpus(CORPUS_SEED)?,
    };
    let report = match a.detector {
        Detector::CamEdit => bench(&corpus, &cfg)?,
        Detector::Sobel => {
            let th = a.baseline_threshold;
            if !th.is_finite() {
                return Err(Failure::Usage(format!("--baseline-threshold must be finite, got {th}")));
            }
            let echo = serde_json::json!({ "threshold": th, "tolerance": cfg.tolerance, "noise": cfg.noise });
            bench_with(&corpus, cfg.noise.as_ref(), cfg.tolerance, "sobel", echo, |img| sobel_baseline(img, th))?
        }
    };
    print_report(&report);
    if let Some(path) = &a.json {
        write_text(path, &report.to_json())?;
    }
    if let Some(path) = &a.csv {
        write_text(path, &report.to_csv())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    kernel: usize,
    #[serde(flatten)]
    metrics: cam_edit_core::eval::MetricsReport,
}

pub const SWEEP_KERNELS: [usize; 4] = [1, 3, 5, 7];

fn sweep_median(a: SweepArgs) -> Outcome {
    let cfg = config(&a.pipeline)?;
    let mut img = load_raster(&a.input)?;
    if let Some(spec) = &cfg.noise {
        img = add_noise_image(&img, spec)?;
    }
    let gt = load_edge_map(&a.gt)?;
    let mut rows = Vec::new();
    for kernel in SWEEP_KERNELS {
        let mut c = cfg.clone();
        c.refine.median_kernel = kernel;
        let edges = detect_staged(&img, &c)?.edges;
        rows.push(SweepRow {
            kernel,
            metrics: evaluate(&edges, &gt, c.tolerance)?,
        });
    }
    println!("{:>6} {:>10} {:>9} {:>9} {:>9} {:>9}", "kernel", "mse", "psnr_db", "precision", "recall", "f");
    for r in &rows {
        let m = &r.metrics;
        println!(
            "{:>6} {:>10.4} {:>9.3} {:>9.4} {:>9.4} {:>9.4}",
            r.kernel, m.mse, m.psnr_db, m.precision, m.recall, m.f_measure
        );
    }
    if let Some(path) = &a.json {
        let doc = serde_json::json!({ "config": cfg, "rows": rows });
        write_text(path, &serde_json::to_string_pretty(&doc).expect("plain data"))?;
    }
    if let Some(path) = &a.csv {
        let mut out = String::from("kernel,mse,psnr_db,precision,recall,f\n");
        for r in &rows {
            let m = &r.metrics;
            let db = if m.psnr_db.is_infinite() { "inf".to_string() } else { m.psnr_db.to_string() };
            let _ = writeln!(out, "{},{},{},{},{},{}", r.kernel, m.mse, db, m.precision, m.recall, m.f_measure);
        }
        write_text(path, &out)?;
    }
    Ok(())
}

fn make_corpus(a: MakeCorpusArgs) -> Outcome {
    let corpus = mini_corpus(RandomSeed(a.seed))?;
    write_corpus(&a.output, &corpus)?;
    for item in &corpus {
        println!("{}: {} ground-truth pixels", item.name, item.gt.count());
    }
    Ok(())
}
