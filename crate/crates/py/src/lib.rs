//! Python bindings. Rasters cross the boundary as flat row-major lists of
//! floats with explicit width and height.

use cam_edit_core as core;
use cam_edit_core::gradient::Inflection;
use cam_edit_core::refine::MorphOrder;
use cam_edit_core::stats::FisherMode;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "ImagePlane", module = "cam_edit", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyImagePlane {
    inner: core::ImagePlane,
}

#[pymethods]
impl PyImagePlane {
    #[new]
    fn new(width: usize, height: usize, data: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: core::ImagePlane::new(width, height, data).map_err(to_py)?,
        })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn data(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    fn get(&self, x: usize, y: usize) -> PyResult<f64> {
        if x >= self.inner.width() || y >= self.inner.height() {
            return Err(PyValueError::new_err(format!("({x}, {y}) is outside the plane")));
        }
        Ok(self.inner.get(x, y))
    }

    fn __repr__(&self) -> String {
        format!("ImagePlane({}x{})", self.inner.width(), self.inner.height())
    }
}

#[pyclass(name = "Image", module = "cam_edit", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyImage {
    inner: core::MultiChannelImage,
}

#[pymethods]
impl PyImage {
    #[new]
    fn new(channels: Vec<PyImagePlane>) -> PyResult<Self> {
        let planes = channels.into_iter().map(|p| p.inner).collect();
        Ok(Self {
            inner: core::MultiChannelImage::new(planes).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_gray(plane: PyImagePlane) -> Self {
        Self {
            inner: core::MultiChannelImage::from_gray(plane.inner),
        }
    }

    /// `rgb` holds `r, g, b` triples in raster order.
    #[staticmethod]
    fn from_rgb(width: usize, height: usize, rgb: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: core::MultiChannelImage::from_interleaved_rgb(width, height, &rgb).map_err(to_py)?,
        })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn channels(&self) -> Vec<PyImagePlane> {
        self.inner.channels().iter().map(|p| PyImagePlane { inner: p.clone() }).collect()
    }

    fn grayscale(&self) -> PyResult<PyImagePlane> {
        Ok(PyImagePlane {
            inner: core::to_grayscale(&self.inner).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{}, {} channels)", self.inner.width(), self.inner.height(), self.inner.channel_count())
    }
}

#[pyclass(name = "EdgeMap", module = "cam_edit", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyEdgeMap {
    inner: core::BinaryEdgeMap,
}

#[pymethods]
impl PyEdgeMap {
    #[new]
    fn new(width: usize, height: usize, bits: Vec<bool>) -> PyResult<Self> {
        Ok(Self {
            inner: core::BinaryEdgeMap::new(width, height, bits).map_err(to_py)?,
        })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn bits(&self) -> Vec<bool> {
        self.inner.bits().to_vec()
    }

    fn count(&self) -> usize {
        self.inner.count()
    }

    fn get(&self, x: usize, y: usize) -> PyResult<bool> {
        if x >= self.inner.width() || y >= self.inner.height() {
            return Err(PyValueError::new_err(format!("({x}, {y}) is outside the map")));
        }
        Ok(self.inner.get(x, y))
    }

    /// Edge pixels as `(x, y)` in raster order.
    fn coords(&self) -> Vec<(usize, usize)> {
        self.inner.coords().points().iter().map(|p| (p.x, p.y)).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.count()
    }

    fn __repr__(&self) -> String {
        format!("EdgeMap({}x{}, {} edge pixels)", self.inner.width(), self.inner.height(), self.inner.count())
    }
}

#[pyclass(name = "PipelineConfig", module = "cam_edit", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyPipelineConfig {
    cam_enabled: bool,
    edit_enabled: bool,
    k_steepness: f64,
    /// `"median"`, `"mean"`, or a number rendered as a string.
    x0: String,
    median_kernel: usize,
    binarize_threshold: f64,
    morph_order: String,
    window: usize,
    stride: usize,
    k_displacement: usize,
    alpha: f64,
    min_points: usize,
    fisher_mode: String,
    tolerance: f64,
    seed: u64,
}

impl PyPipelineConfig {
    fn to_core(&self) -> PyResult<core::PipelineConfig> {
        let mut cfg = core::PipelineConfig::default();
        cfg.cam_enabled = self.cam_enabled;
        cfg.edit_enabled = self.edit_enabled;
        cfg.membership.k = self.k_steepness;
        cfg.membership.x0 = self.x0.parse::<Inflection>().map_err(to_py)?;
        cfg.refine.median_kernel = self.median_kernel;
        cfg.refine.binarize_threshold = self.binarize_threshold;
        cfg.refine.morph_order = self.morph_order.parse::<MorphOrder>().map_err(to_py)?;
        cfg.edit.window = self.window;
        cfg.edit.stride = self.stride;
        cfg.edit.k = self.k_displacement;
        cfg.edit.alpha = self.alpha;
        cfg.edit.min_points = self.min_points;
        cfg.edit.fisher_mode = self.fisher_mode.parse::<FisherMode>().map_err(to_py)?;
        cfg.tolerance = self.tolerance;
        cfg.seed = core::RandomSeed(self.seed);
        cfg.validate().map_err(to_py)?;
        Ok(cfg)
    }
}

#[pymethods]
impl PyPipelineConfig {
    #[new]
    fn new() -> Self {
        let d = core::PipelineConfig::default();
        Self {
            cam_enabled: d.cam_enabled,
            edit_enabled: d.edit_enabled,
            k_steepness: d.membership.k,
            x0: d.membership.x0.to_string(),
            median_kernel: d.refine.median_kernel,
            binarize_threshold: d.refine.binarize_threshold,
            morph_order: d.refine.morph_order.to_string(),
            window: d.edit.window,
            stride: d.edit.stride,
            k_displacement: d.edit.k,
            alpha: d.edit.alpha,
            min_points: d.edit.min_points,
            fisher_mode: d.edit.fisher_mode.to_string(),
            tolerance: d.tolerance,
            seed: d.seed.0,
        }
    }

    fn validate(&self) -> PyResult<()> {
        self.to_core().map(|_| ())
    }
}

fn config_or_default(cfg: Option<&PyPipelineConfig>) -> PyResult<core::PipelineConfig> {
    match cfg {
        Some(c) => c.to_core(),
        None => Ok(core::PipelineConfig::default()),
    }
}

#[pyclass(name = "ContingencyTable", module = "cam_edit", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyContingencyTable {
    a: u64,
    b: u64,
    c: u64,
    d: u64,
}

impl PyContingencyTable {
    fn to_core(&self) -> core::stats::ContingencyTable {
        core::stats::ContingencyTable::new(self.a, self.b, self.c, self.d)
    }
}

#[pymethods]
impl PyContingencyTable {
    #[new]
    fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Self { a, b, c, d }
    }

    fn total(&self) -> u64 {
        self.to_core().total()
    }

    fn __repr__(&self) -> String {
        format!("ContingencyTable(a={}, b={}, c={}, d={})", self.a, self.b, self.c, self.d)
    }
}

#[pyfunction]
#[pyo3(signature = (image, config = None))]
fn detect(py: Python<'_>, image: &PyImage, config: Option<&PyPipelineConfig>) -> PyResult<PyEdgeMap> {
    let cfg = config_or_default(config)?;
    let img = image.inner.clone();
    let inner = py.detach(move || core::detect(&img, &cfg)).map_err(to_py)?;
    Ok(PyEdgeMap { inner })
}

/// Every intermediate of one run, keyed by stage name.
#[pyfunction]
#[pyo3(signature = (image, config = None))]
fn detect_stages<'py>(
    py: Python<'py>,
    image: &PyImage,
    config: Option<&PyPipelineConfig>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config_or_default(config)?;
    let img = image.inner.clone();
    let s = py.detach(move || core::detect_staged(&img, &cfg)).map_err(to_py)?;
    let out = PyDict::new(py);
    let plane = |p: &core::ImagePlane| PyImagePlane { inner: p.clone() };
    out.set_item("fused", plane(&s.fused))?;
    out.set_item("weights", s.weights.map(|w| w.alpha))?;
    out.set_item("magnitude", plane(&s.gradient.mag))?;
    out.set_item("direction", plane(&s.gradient.theta))?;
    out.set_item("membership", plane(&s.membership))?;
    out.set_item("pre_edit", PyEdgeMap { inner: s.pre_edit })?;
    out.set_item("edges", PyEdgeMap { inner: s.edges })?;
    Ok(out)
}

#[pyfunction]
fn sobel_baseline(image: &PyImage, threshold: f64) -> PyResult<PyEdgeMap> {
    Ok(PyEdgeMap {
        inner: core::eval::sobel_baseline(&image.inner, threshold).map_err(to_py)?,
    })
}

fn report_dict<'py>(py: Python<'py>, r: &core::eval::MetricsReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("mse", r.mse)?;
    d.set_item("psnr_db", r.psnr_db)?;
    d.set_item("precision", r.precision)?;
    d.set_item("recall", r.recall)?;
    d.set_item("f", r.f_measure)?;
    d.set_item("tp", r.tp)?;
    d.set_item("fp", r.fp)?;
    d.set_item("fn", r.fn_)?;
    Ok(d)
}

/// MSE, PSNR (infinite for identical maps), precision, recall and F.
#[pyfunction]
#[pyo3(signature = (pred, gt, tolerance = 2.0))]
fn evaluate<'py>(py: Python<'py>, pred: &PyEdgeMap, gt: &PyEdgeMap, tolerance: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = core::eval::evaluate(&pred.inner, &gt.inner, tolerance).map_err(to_py)?;
    report_dict(py, &r)
}

#[pyfunction]
fn mse(pred: &PyImagePlane, reference: &PyImagePlane) -> PyResult<f64> {
    core::eval::mse(&pred.inner, &reference.inner).map_err(to_py)
}

#[pyfunction]
fn psnr(pred: &PyImagePlane, reference: &PyImagePlane) -> PyResult<f64> {
    core::eval::psnr(&pred.inner, &reference.inner).map_err(to_py)
}

/// `kind` is `"gaussian"` (level = sigma on the 0-255 scale) or
/// `"salt-pepper"` (level = fraction of pixels).
#[pyfunction]
#[pyo3(signature = (image, kind, level, seed = 0))]
fn add_noise(image: &PyImage, kind: &str, level: f64, seed: u64) -> PyResult<PyImage> {
    let spec = core::eval::NoiseSpec {
        kind: kind.parse().map_err(to_py)?,
        level,
        seed: core::RandomSeed(seed),
    };
    Ok(PyImage {
        inner: core::eval::add_noise_image(&image.inner, &spec).map_err(to_py)?,
    })
}

#[pyfunction]
fn fisher_point_probability(table: &PyContingencyTable) -> f64 {
    core::stats::fisher_point_probability(&table.to_core())
}

#[pyfunction]
fn chi_square_statistic(table: &PyContingencyTable) -> PyResult<f64> {
    core::stats::chi_square_statistic(&table.to_core()).map_err(to_py)
}

/// Fisher below five counts in any cell, chi-square otherwise. Returns
/// `(method, p, dependent)`.
#[pyfunction]
#[pyo3(signature = (table, alpha = 0.05, fisher_mode = "point"))]
fn independence_test(table: &PyContingencyTable, alpha: f64, fisher_mode: &str) -> PyResult<(String, f64, bool)> {
    let cfg = core::stats::TestConfig {
        alpha,
        fisher_mode: fisher_mode.parse().map_err(to_py)?,
    };
    let r = core::stats::independence_test(&table.to_core(), &cfg).map_err(to_py)?;
    Ok((r.method.to_string(), r.p, r.dependent))
}

/// Displacement table of a point set, counted over ordered pairs.
#[pyfunction]
fn build_table(points: Vec<(usize, usize)>, k: usize) -> PyResult<PyContingencyTable> {
    let pts: Vec<core::Pixel> = points.into_iter().map(|(x, y)| core::Pixel::new(x, y)).collect();
    let t = core::stats::build_table(&pts, k).map_err(to_py)?;
    Ok(PyContingencyTable { a: t.a, b: t.b, c: t.c, d: t.d })
}

#[pyfunction]
#[pyo3(signature = (edges, config = None))]
fn edit_filter(edges: &PyEdgeMap, config: Option<&PyPipelineConfig>) -> PyResult<PyEdgeMap> {
    let cfg = config_or_default(config)?;
    Ok(PyEdgeMap {
        inner: core::edit::edit_filter(&edges.inner, &cfg.edit).map_err(to_py)?,
    })
}

#[pyfunction]
fn load_image(path: &str) -> PyResult<PyImage> {
    Ok(PyImage {
        inner: core::io::load_raster(path).map_err(to_py)?,
    })
}

#[pyfunction]
fn load_edge_map(path: &str) -> PyResult<PyEdgeMap> {
    Ok(PyEdgeMap {
        inner: core::io::load_edge_map(path).map_err(to_py)?,
    })
}

#[pyfunction]
fn save_edge_map(path: &str, edges: &PyEdgeMap) -> PyResult<()> {
    core::io::save_edge_map(path, &edges.inner).map_err(to_py)
}

/// The synthetic benchmark corpus as `(name, image, ground_truth)` triples.
#[pyfunction]
#[pyo3(signature = (seed = None))]
fn mini_corpus(seed: Option<u64>) -> PyResult<Vec<(String, PyImage, PyEdgeMap)>> {
    let seed = seed.map(core::RandomSeed).unwrap_or(core::synth::CORPUS_SEED);
    Ok(core::synth::mini_corpus(seed)
        .map_err(to_py)?
        .into_iter()
        .map(|i| (i.name, PyImage { inner: i.image }, PyEdgeMap { inner: i.gt }))
        .collect())
}

#[pymodule]
pub fn cam_edit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyImagePlane>()?;
    m.add_class::<PyImage>()?;
    m.add_class::<PyEdgeMap>()?;
    m.add_class::<PyPipelineConfig>()?;
    m.add_class::<PyContingencyTable>()?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(detect_stages, m)?)?;
    m.add_function(wrap_pyfunction!(sobel_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(add_noise, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_point_probability, m)?)?;
    m.add_function(wrap_pyfunction!(chi_square_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(independence_test, m)?)?;
    m.add_function(wrap_pyfunction!(build_table, m)?)?;
    m.add_function(wrap_pyfunction!(edit_filter, m)?)?;
    m.add_function(wrap_pyfunction!(load_image, m)?)?;
    m.add_function(wrap_pyfunction!(load_edge_map, m)?)?;
    m.add_function(wrap_pyfunction!(save_edge_map, m)?)?;
    m.add_function(wrap_pyfunction!(mini_corpus, m)?)?;
    Ok(())
}
