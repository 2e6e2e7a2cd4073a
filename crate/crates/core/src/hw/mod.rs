//! Accelerator model: analytic memory and bandwidth figures plus small
//! cycle-level simulations of the tile datapath.

pub mod analytic;
pub mod banks;
pub mod config;
pub mod frag;
pub mod pipeline;

pub use analytic::{
    divider_budget, global_bandwidth, memory_vs_tile_size, model_report, tile_count, tile_sram,
    tile_sram_for, tiled_bandwidth, traffic_breakdown, working_memory, DividerBudget, ModelReport,
    TrafficBreakdown,
};
pub use banks::{
    simulate_bank_access, write_access_trace, AccessRecord, BankMap, BankSimResult, PassDirection,
};
pub use config::SystemConfig;
pub use frag::{
    frag_inverse, frag_step, frag_translate, retained_in_place, FragDirection, FragState, FragStep,
    FragTracker,
};
pub use pipeline::{simulate_pipeline, PipelineConfig, PipelineReport, UnitBusy};
