//! Python module `pypermfilter`: images, filter parameters, number formats,
//! the filters themselves and the accelerator model.

// pyo3 0.22 method wrappers trip this lint.
#![allow(clippy::useless_conversion)]

use std::path::PathBuf;

use permfilter::fp::{self, FilterMode, RoundingMode, SweepInput};
use permfilter::hw::{self, BankMap, PassDirection, PipelineConfig};
use permfilter::scanline;
use permfilter::{io, synth, tiled, Overlap, PermeabilityKind, TileGeometry};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn to_py(err: permfilter::Error) -> PyErr {
    match err {
        permfilter::Error::Io(e) => PyOSError::new_err(e.to_string()),
        e @ (permfilter::Error::Input(_)
        | permfilter::Error::Dimension { .. }
        | permfilter::Error::Format { .. }) => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for permfilter::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Converts a serde value into plain Python objects.
fn json_to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<PyObject> {
    use serde_json::Value;
    Ok(match value {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_py(py),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.into_py(py),
            (None, Some(i)) => i.into_py(py),
            _ => n.as_f64().unwrap_or(f64::NAN).into_py(py),
        },
        Value::String(s) => s.into_py(py),
        Value::Array(items) => {
            let list = PyList::empty_bound(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py(py)
        }
        Value::Object(map) => {
            let dict = PyDict::new_bound(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_py(py)
        }
    })
}

fn to_dict<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<PyObject> {
    let json = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &json)
}

/// Grayscale image or single feature channel, stored row-major in `f64`.
#[pyclass(name = "Image", module = "pypermfilter")]
#[derive(Clone)]
struct PyImage {
    inner: permfilter::Image2D,
}

#[pymethods]
impl PyImage {
    /// Builds an image from a list of equally long rows.
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(PyValueError::new_err("rows must all have the same length"));
        }
        let inner = permfilter::Image2D::new(width, height, rows.concat()).py_err()?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            inner: permfilter::Image2D::filled(width, height, value),
        }
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: io::read_image(&path).py_err()?,
        })
    }

    /// Writes `.pgm` (8-bit, clamped to [0, 1]) or `.pfm`.
    fn write(&self, path: PathBuf) -> PyResult<()> {
        io::write_image(&path, &self.inner).py_err()
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn get(&self, x: usize, y: usize) -> PyResult<f64> {
        if x >= self.inner.width() || y >= self.inner.height() {
            return Err(PyValueError::new_err(format!(
                "pixel ({x}, {y}) outside the image"
            )));
        }
        Ok(self.inner.get(x, y))
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        self.inner.rows().map(<[f64]>::to_vec).collect()
    }

    fn min_max(&self) -> (f64, f64) {
        self.inner.min_max()
    }

    fn max_abs_diff(&self, other: &PyImage) -> PyResult<f64> {
        self.inner.max_abs_diff(&other.inner).py_err()
    }

    fn __eq__(&self, other: &PyImage) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{})", self.inner.width(), self.inner.height())
    }
}

#[pyclass(name = "FilterParams", module = "pypermfilter")]
#[derive(Clone)]
struct PyFilterParams {
    inner: permfilter::FilterParams,
}

#[pymethods]
impl PyFilterParams {
    #[new]
    #[pyo3(signature = (sigma=0.1, alpha=2.0, lam=0.0, iterations=4, permeability="rational"))]
    fn new(
        sigma: f64,
        alpha: f64,
        lam: f64,
        iterations: usize,
        permeability: &str,
    ) -> PyResult<Self> {
        let kind: PermeabilityKind = permeability.parse().py_err()?;
        let inner = permfilter::FilterParams::new(sigma, alpha, lam, iterations)
            .py_err()?
            .with_permeability(kind);
        Ok(Self { inner })
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "FilterParams(sigma={}, alpha={}, lam={}, iterations={}, permeability={:?})",
            p.sigma, p.alpha, p.lambda, p.iterations, p.permeability
        )
    }
}

/// Emulated floating-point format with `exp_bits` exponent and
/// `mant_bits` stored mantissa bits.
#[pyclass(name = "FpFormat", module = "pypermfilter")]
#[derive(Clone, Copy)]
struct PyFpFormat {
    inner: permfilter::FpFormat,
}

#[pymethods]
impl PyFpFormat {
    #[new]
    #[pyo3(signature = (exp_bits, mant_bits, flush_denormals=true, rounding="nearest"))]
    fn new(exp_bits: u32, mant_bits: u32, flush_denormals: bool, rounding: &str) -> PyResult<Self> {
        let rounding = match rounding {
            "nearest" => RoundingMode::Nearest,
            "truncate" => RoundingMode::Truncate,
            other => return Err(PyValueError::new_err(format!("unknown rounding '{other}'"))),
        };
        let inner = permfilter::FpFormat::new(exp_bits, mant_bits)
            .py_err()?
            .with_denormals(!flush_denormals)
            .with_rounding(rounding);
        Ok(Self { inner })
    }

    /// Parses `"exp,mant"`.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: text.parse().py_err()?,
        })
    }

    #[staticmethod]
    fn fp24() -> Self {
        Self {
            inner: permfilter::FpFormat::FP24,
        }
    }

    #[getter]
    fn exp_bits(&self) -> u32 {
        self.inner.exp_bits
    }

    #[getter]
    fn mant_bits(&self) -> u32 {
        self.inner.mant_bits
    }

    #[getter]
    fn total_bits(&self) -> u32 {
        self.inner.total_bits()
    }

    fn quantize(&self, x: f64) -> PyResult<f64> {
        self.inner.quantize(x).py_err()
    }

    fn add(&self, a: f64, b: f64) -> f64 {
        fp::q_add(a, b, &self.inner)
    }

    fn sub(&self, a: f64, b: f64) -> f64 {
        fp::q_sub(a, b, &self.inner)
    }

    fn mul(&self, a: f64, b: f64) -> f64 {
        fp::q_mul(a, b, &self.inner)
    }

    fn div(&self, a: f64, b: f64) -> PyResult<f64> {
        fp::q_div(a, b, &self.inner).py_err()
    }

    fn __repr__(&self) -> String {
        format!("FpFormat({})", self.inner)
    }
}

fn filter_mode(mode: &str, tile: usize, overlap: &str) -> PyResult<FilterMode> {
    match mode {
        "global" => Ok(FilterMode::Global),
        "tiled" => {
            let ov: Overlap = overlap.parse().py_err()?;
            Ok(FilterMode::Tiled(
                TileGeometry::with_overlap(tile, ov).py_err()?,
            ))
        }
        other => Err(PyValueError::new_err(format!(
            "unknown mode '{other}' (expected global or tiled)"
        ))),
    }
}

fn params_or_default(params: Option<&PyFilterParams>) -> permfilter::FilterParams {
    params.map_or_else(permfilter::FilterParams::default, |p| p.inner)
}

/// Filters `data` guided by `guide` (or by itself). `fp` selects an emulated
/// number format for every arithmetic operation.
#[pyfunction]
#[pyo3(signature = (data, guide=None, params=None, mode="tiled", tile=48, overlap="2/3", fp=None))]
#[allow(clippy::too_many_arguments)]
fn filter(
    py: Python<'_>,
    data: &PyImage,
    guide: Option<&PyImage>,
    params: Option<&PyFilterParams>,
    mode: &str,
    tile: usize,
    overlap: &str,
    fp: Option<&PyFpFormat>,
) -> PyResult<PyImage> {
    let mode = filter_mode(mode, tile, overlap)?;
    let params = params_or_default(params);
    let guide = guide.unwrap_or(data);
    let out = py.allow_threads(|| match fp {
        Some(f) => fp::pf_quantized(&guide.inner, &data.inner, &params, &mode, &f.inner),
        None => fp::pf_exact(&guide.inner, &data.inner, &params, &mode),
    });
    Ok(PyImage {
        inner: out.py_err()?,
    })
}

/// One filtered scanline: `pi` has one entry less than `j` and `a`.
#[pyfunction]
#[pyo3(signature = (pi, j, a, lam=0.0))]
fn filter_line(pi: Vec<f64>, j: Vec<f64>, a: Vec<f64>, lam: f64) -> PyResult<Vec<f64>> {
    if j.is_empty() || a.len() != j.len() || pi.len() + 1 != j.len() {
        return Err(PyValueError::new_err(
            "expected len(pi) + 1 == len(j) == len(a) > 0",
        ));
    }
    Ok(scanline::filter_line(&pi, &j, &a, lam))
}

/// Dense quadratic-time evaluation of one scanline, for checking.
#[pyfunction]
#[pyo3(signature = (pi, j, a, lam=0.0))]
fn filter_line_dense(pi: Vec<f64>, j: Vec<f64>, a: Vec<f64>, lam: f64) -> PyResult<Vec<f64>> {
    scanline::pf_oracle_row(&pi, &j, &a, lam).py_err()
}

#[pyfunction]
fn psnr(reference: &PyImage, test: &PyImage, peak: f64) -> PyResult<f64> {
    fp::psnr(&reference.inner, &test.inner, peak).py_err()
}

/// PSNR of each format against the double-precision filter, as a list of dicts.
#[pyfunction]
#[pyo3(signature = (data, formats, guide=None, params=None, mode="tiled", peak=None))]
fn format_sweep(
    py: Python<'_>,
    data: &PyImage,
    formats: Vec<PyFpFormat>,
    guide: Option<&PyImage>,
    params: Option<&PyFilterParams>,
    mode: &str,
    peak: Option<f64>,
) -> PyResult<PyObject> {
    let mode = filter_mode(mode, 48, "2/3")?;
    let params = params_or_default(params);
    let formats: Vec<_> = formats.iter().map(|f| f.inner).collect();
    let input = SweepInput {
        guide: &guide.unwrap_or(data).inner,
        data: &data.inner,
        peak,
        flow: None,
    };
    let reports = py
        .allow_threads(|| fp::format_sweep(&input, &formats, &params, &mode))
        .py_err()?;
    to_dict(py, &reports)
}

/// Tiled filter at every supported overlap against the global filter.
#[pyfunction]
#[pyo3(signature = (data, guide=None, params=None, tile=48))]
fn overlap_sweep(
    py: Python<'_>,
    data: &PyImage,
    guide: Option<&PyImage>,
    params: Option<&PyFilterParams>,
    tile: usize,
) -> PyResult<PyObject> {
    let params = params_or_default(params);
    let guide = &guide.unwrap_or(data).inner;
    let results = py
        .allow_threads(|| tiled::overlap_sweep(guide, &data.inner, &params, tile))
        .py_err()?;
    let reports: Vec<_> = results.into_iter().map(|(r, _)| r).collect();
    to_dict(py, &reports)
}

/// Accelerator parameters; keyword arguments override the HD defaults.
#[pyclass(name = "SystemConfig", module = "pypermfilter")]
#[derive(Clone)]
struct PySystemConfig {
    inner: permfilter::SystemConfig,
}

#[pymethods]
impl PySystemConfig {
    #[new]
    #[pyo3(signature = (width=1280, height=720, word_bits=24, iterations=4, fps=25.0, core_freq=300e6, tile_side=48, num_fus=12, num_banks=12, interleave_depth=2))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        width: usize,
        height: usize,
        word_bits: usize,
        iterations: usize,
        fps: f64,
        core_freq: f64,
        tile_side: usize,
        num_fus: usize,
        num_banks: usize,
        interleave_depth: usize,
    ) -> PyResult<Self> {
        let inner = permfilter::SystemConfig {
            width,
            height,
            word_bits,
            iterations,
            fps,
            core_freq,
            tile_side,
            step: tile_side / 3,
            num_fus,
            num_banks,
            interleave_depth,
            ..permfilter::SystemConfig::default()
        };
        inner.validate().py_err()?;
        Ok(Self { inner })
    }

    fn model_report(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_dict(py, &permfilter::model_report(&self.inner))
    }

    /// Bank conflicts of one pass direction (`"horizontal"`/`"vertical"`)
    /// under a bank map (`"checkerboard"`/`"row-major"`).
    #[pyo3(signature = (direction="vertical", bank_map="checkerboard"))]
    fn simulate_banks(
        &self,
        py: Python<'_>,
        direction: &str,
        bank_map: &str,
    ) -> PyResult<PyObject> {
        let dir: PassDirection = direction.parse().py_err()?;
        let map: BankMap = bank_map.parse().py_err()?;
        let r = hw::simulate_bank_access(&self.inner, dir, map, false).py_err()?;
        to_dict(py, &r)
    }

    fn simulate_pipeline(&self, py: Python<'_>) -> PyResult<PyObject> {
        let r = hw::simulate_pipeline(&PipelineConfig::from_system(&self.inner)).py_err()?;
        to_dict(py, &r)
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "SystemConfig({}x{}, T={}, K={})",
            c.width, c.height, c.tile_side, c.iterations
        )
    }
}

/// Physical `(row, col)` of logical pixel `(row, col)` in fragmentation state `(sx, sy)`.
#[pyfunction]
#[pyo3(signature = (sx, sy, row, col, tile_side=48))]
fn frag_translate(
    sx: usize,
    sy: usize,
    row: usize,
    col: usize,
    tile_side: usize,
) -> PyResult<(usize, usize)> {
    let state = hw::FragState::new(sx, sy).py_err()?;
    hw::frag_translate(state, (row, col), tile_side).py_err()
}

#[pyfunction]
fn sdr_scene(width: usize, height: usize, seed: u64) -> PyImage {
    PyImage {
        inner: synth::sdr_scene(width, height, seed),
    }
}

#[pyfunction]
fn hdr_scene(width: usize, height: usize, seed: u64) -> PyImage {
    PyImage {
        inner: synth::hdr_scene(width, height, seed),
    }
}

#[pyfunction]
fn log_guide(hdr: &PyImage) -> PyImage {
    PyImage {
        inner: synth::log_guide(&hdr.inner),
    }
}

#[pymodule]
pub fn pypermfilter(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyImage>()?;
    m.add_class::<PyFilterParams>()?;
    m.add_class::<PyFpFormat>()?;
    m.add_class::<PySystemConfig>()?;
    m.add_function(wrap_pyfunction!(filter, m)?)?;
    m.add_function(wrap_pyfunction!(filter_line, m)?)?;
    m.add_function(wrap_pyfunction!(filter_line_dense, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(format_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(overlap_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(frag_translate, m)?)?;
    m.add_function(wrap_pyfunction!(sdr_scene, m)?)?;
    m.add_function(wrap_pyfunction!(hdr_scene, m)?)?;
    m.add_function(wrap_pyfunction!(log_guide, m)?)?;
    Ok(())
}
