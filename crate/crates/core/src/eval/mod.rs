//! Quality metrics, noise injection and the corpus benchmark.

pub mod bench;
pub mod metrics;
pub mod noise;

pub use bench::{bench, bench_with, load_corpus, sobel_baseline, BenchReport, BenchRow, CorpusItem, MeanMetrics};
pub use metrics::{evaluate, evaluate_against_image, f_measure, mse, psnr, psnr_from_mse, BoundaryScore, MetricsReport};
pub use noise::{add_noise, add_noise_image, NoiseKind, NoiseSpec};
