//! Permeability filter (PF) and tiled permeability filter (TPF) for
//! edge-aware filtering, with a custom floating-point emulation layer and an
//! analytical/cycle-level model of a tiled PF accelerator.

mod dd;
pub mod error;
pub mod fp;
pub mod hw;
pub mod image;
pub mod io;
pub mod permeability;
pub mod scanline;
pub mod synth;
pub mod tiled;

pub use error::{Error, Result};
pub use fp::{FilterMode, FpFormat, QualityReport};
pub use hw::{model_report, ModelReport, SystemConfig};
pub use image::{FlowField, Image2D};
pub use permeability::{
    compute_permeabilities, compute_permeabilities_with, PermeabilityKind, PermeabilityPair,
};
pub use scanline::{pf_global, pf_global_guided, FilterParams};
pub use tiled::{overlap_sweep, tpf, Overlap, OverlapReport, TileGeometry, TileGrid};
