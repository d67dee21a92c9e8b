use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{evaluate, serialize_db, MetricsReport};
use super::noise::{add_noise_image, NoiseSpec};
use crate::error::{Error, Result};
use crate::gradient::sobel;
use crate::image::{to_grayscale, BinaryEdgeMap, MultiChannelImage};
use crate::io::{load_edge_map, load_raster, scan_corpus_dir};
use crate::pipeline::{detect, PipelineConfig};

/// One benchmark image with its ground-truth edge map.
#[derive(Debug, Clone)]
pub struct CorpusItem {
    pub name: String,
    pub image: MultiChannelImage,
    pub gt: BinaryEdgeMap,
}

impl CorpusItem {
    pub fn new(name: impl Into<String>, image: MultiChannelImage, gt: BinaryEdgeMap) -> Result<Self> {
        crate::image::ensure_same_dims(image.dims(), gt.dims())?;
        Ok(Self {
            name: name.into(),
            image,
            gt,
        })
    }
}

pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<CorpusItem>> {
    scan_corpus_dir(dir)?
        .into_iter()
        .map(|e| CorpusItem::new(e.name, load_raster(&e.image)?, load_edge_map(&e.ground_truth)?))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub name: String,
    #[serde(flatten)]
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanMetrics {
    pub mse: f64,
    /// Mean of the per-image values; infinite if any image is.
    #[serde(serialize_with = "serialize_db")]
    pub psnr_db: f64,
    pub precision: f64,
    pub recall: f64,
    #[serde(rename = "f")]
    pub f_measure: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub detector: String,
    pub config: serde_json::Value,
    pub rows: Vec<BenchRow>,
    pub mean: MeanMetrics,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    /// Per-image rows followed by a `mean` row.
    pub fn to_csv(&self) -> String {
        let db = |v: f64| if v.is_infinite() { "inf".to_string() } else { v.to_string() };
        let mut out = String::from("name,mse,psnr_db,precision,recall,f,tp,fp,fn\n");
        for r in &self.rows {
            let m = &r.metrics;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.name, m.mse, db(m.psnr_db), m.precision, m.recall, m.f_measure, m.tp, m.fp, m.fn_
            ));
        }
        let m = &self.mean;
        out.push_str(&format!(
            "mean,{},{},{},{},{},,,\n",
            m.mse, db(m.psnr_db), m.precision, m.recall, m.f_measure
        ));
        out
    }
}

fn mean_of(rows: &[BenchRow]) -> MeanMetrics {
    let n = rows.len() as f64;
    let sum = |f: fn(&MetricsReport) -> f64| rows.iter().map(|r| f(&r.metrics)).sum::<f64>() / n;
    MeanMetrics {
        mse: sum(|m| m.mse),
        psnr_db: sum(|m| m.psnr_db),
        precision: sum(|m| m.precision),
        recall: sum(|m| m.recall),
        f_measure: sum(|m| m.f_measure),
    }
}

/// Runs `detector` over the corpus. When `noise` is set, image `i` is
/// corrupted with a seed derived from the spec's seed and `i`. Images run in
/// parallel; rows and means are always in corpus order.
pub fn bench_with<F>(
    corpus: &[CorpusItem],
    noise: Option<&NoiseSpec>,
    tolerance: f64,
    detector_name: &str,
    config: serde_json::Value,
    detector: F,
) -> Result<BenchReport>
where
    F: Fn(&MultiChannelImage) -> Result<BinaryEdgeMap> + Sync,
{
    if corpus.is_empty() {
        return Err(Error::invalid("corpus", "no images"));
    }
    let rows = corpus
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let noisy;
            let img = match noise {
                Some(spec) => {
                    let spec = NoiseSpec {
                        seed: spec.seed.derive(i as u64),
                        ..*spec
                    };
                    noisy = add_noise_image(&item.image, &spec)?;
                    &noisy
                }
                None => &item.image,
            };
            let pred = detector(img)?;
            Ok(BenchRow {
                name: item.name.clone(),
                metrics: evaluate(&pred, &item.gt, tolerance)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = mean_of(&rows);
    Ok(BenchReport {
        detector: detector_name.to_string(),
        config,
        rows,
        mean,
    })
}

/// Full pipeline over the corpus, with `cfg.noise` applied when present.
pub fn bench(corpus: &[CorpusItem], cfg: &PipelineConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let echo = serde_json::to_value(cfg).expect("config is plain data");
    bench_with(corpus, cfg.noise.as_ref(), cfg.tolerance, "cam-edit", echo, |img| detect(img, cfg))
}

/// Default threshold of the comparison detector, on the Sobel magnitude of
/// the `[0, 1]` grayscale image. A sharp step scores four times its height,
/// so 0.5 flags steps of an eighth of the full range.
pub const BASELINE_THRESHOLD: f64 = 0.5;

/// Comparison detector: Sobel magnitude of the grayscale image, thresholded.
pub fn sobel_baseline(img: &MultiChannelImage, threshold: f64) -> Result<BinaryEdgeMap> {
    let g = sobel(&to_grayscale(img)?)?;
    let (w, h) = g.mag.dims();
    BinaryEdgeMap::new(w, h, g.mag.data().iter().map(|&m| m >= threshold).collect())
}
