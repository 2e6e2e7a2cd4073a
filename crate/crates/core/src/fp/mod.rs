//! Custom floating-point emulation and the precision study built on it.

pub mod format;
pub mod metrics;
pub mod ops;
pub mod study;

pub use format::{FpFormat, RoundingMode};
pub use metrics::{aee, psnr};
pub use ops::{q_add, q_div, q_mul, q_sub};
pub use study::{
    filter_flow, format_sweep, pf_exact, pf_quantized, write_sweep_csv, FilterMode, QualityReport,
    SweepInput,
};
