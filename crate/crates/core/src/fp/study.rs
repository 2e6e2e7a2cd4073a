//! Reduced-precision filtering and the number-format sweep.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fp::format::FpFormat;
use crate::fp::metrics::{aee, psnr};
use crate::image::{FlowField, Image2D};
use crate::scanline::{pf_iterate, Compensated, FilterParams, LineKernel};
use crate::tiled::{tpf_padded, TileGeometry};

/// Whole-frame filtering or tiled filtering with the given geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterMode {
    Global,
    Tiled(TileGeometry),
}

impl Default for FilterMode {
    fn default() -> Self {
        FilterMode::Tiled(TileGeometry::default())
    }
}

fn run_filter<K: LineKernel + ?Sized>(
    kernel: &K,
    guide: &Image2D,
    a: &Image2D,
    params: &FilterParams,
    mode: &FilterMode,
) -> Result<Image2D> {
    guide.check_extent(a)?;
    if !(0.0..=1.0).contains(&params.lambda) {
        return Err(Error::input(format!(
            "lambda must lie in [0, 1], got {}",
            params.lambda
        )));
    }
    match mode {
        FilterMode::Global => {
            let pi = params.permeabilities(guide)?;
            Ok(pf_iterate(kernel, &pi, a, params.lambda, params.iterations))
        }
        FilterMode::Tiled(geometry) => tpf_padded(kernel, guide, a, params, geometry),
    }
}

/// Double-precision reference filter in either mode.
pub fn pf_exact(
    guide: &Image2D,
    a: &Image2D,
    params: &FilterParams,
    mode: &FilterMode,
) -> Result<Image2D> {
    run_filter(&Compensated, guide, a, params, mode)
}

/// The filter with every recursion and combine operation rounded into `fmt`.
///
/// Permeabilities are computed in `f64` from the guide and quantized on
/// ingest together with the data channel. Blending of tiles stays in `f64`.
pub fn pf_quantized(
    guide: &Image2D,
    a: &Image2D,
    params: &FilterParams,
    mode: &FilterMode,
    fmt: &FpFormat,
) -> Result<Image2D> {
    fmt.validate()?;
    run_filter(fmt, guide, a, params, mode)
}

/// Filters both flow components with permeabilities shared from `guide`.
pub fn filter_flow(
    guide: &Image2D,
    flow: &FlowField,
    params: &FilterParams,
    mode: &FilterMode,
    fmt: Option<&FpFormat>,
) -> Result<FlowField> {
    let run = |c: &Image2D| match fmt {
        Some(f) => pf_quantized(guide, c, params, mode, f),
        None => pf_exact(guide, c, params, mode),
    };
    FlowField::new(run(&flow.u)?, run(&flow.v)?)
}

/// Quality of one number format relative to the `f64` filter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub format: FpFormat,
    /// PSNR of the filtered dense data; `inf` when bit-identical.
    pub psnr_db: f64,
    /// Average endpoint error of the filtered flow, when a flow field was supplied.
    pub aee: Option<f64>,
}

/// Inputs of a format sweep.
#[derive(Clone, Debug)]
pub struct SweepInput<'a> {
    pub guide: &'a Image2D,
    pub data: &'a Image2D,
    /// PSNR peak; `None` uses the largest magnitude of the reference result.
    pub peak: Option<f64>,
    /// Optional flow field, filtered with the same guide.
    pub flow: Option<(&'a Image2D, &'a FlowField)>,
}

/// Runs the filter once per format and scores it against the `f64` run.
pub fn format_sweep(
    input: &SweepInput<'_>,
    formats: &[FpFormat],
    params: &FilterParams,
    mode: &FilterMode,
) -> Result<Vec<QualityReport>> {
    if formats.is_empty() {
        return Err(Error::input("format sweep needs at least one format"));
    }
    let reference = pf_exact(input.guide, input.data, params, mode)?;
    let peak = match input.peak {
        Some(p) => p,
        None => reference.data().iter().fold(0.0_f64, |m, v| m.max(v.abs())),
    };
    let flow_reference = match input.flow {
        Some((guide, flow)) => Some(filter_flow(guide, flow, params, mode, None)?),
        None => None,
    };
    formats
        .iter()
        .map(|fmt| {
            let out = pf_quantized(input.guide, input.data, params, mode, fmt)?;
            let psnr_db = psnr(&reference, &out, peak)?;
            let aee = match (input.flow, &flow_reference) {
                (Some((guide, flow)), Some(reference)) => {
                    let test = filter_flow(guide, flow, params, mode, Some(fmt))?;
                    Some(aee(reference, &test)?)
                }
                _ => None,
            };
            Ok(QualityReport {
                format: *fmt,
                psnr_db,
                aee,
            })
        })
        .collect()
}

/// Writes reports as CSV with columns `exp_bits,mant_bits,psnr_db,aee`.
pub fn write_sweep_csv<W: Write>(reports: &[QualityReport], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["exp_bits", "mant_bits", "psnr_db", "aee"])?;
    for r in reports {
        wtr.write_record([
            r.format.exp_bits.to_string(),
            r.format.mant_bits.to_string(),
            format_float(r.psnr_db),
            r.aee.map(format_float).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

fn format_float(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.6}")
    }
}
