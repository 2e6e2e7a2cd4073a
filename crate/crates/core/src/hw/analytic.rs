//! Closed-form memory, bandwidth and throughput figures.

use serde::{Deserialize, Serialize};

use crate::hw::config::SystemConfig;

/// Bits of off-chip working memory for the global filter: both permeability
/// maps, the data channel and the running result.
pub fn working_memory(cfg: &SystemConfig) -> u64 {
    4 * (cfg.width * cfg.height * cfg.word_bits) as u64
}

/// Off-chip bandwidth of the global filter in bytes per second.
///
/// Every one of the `2K` passes moves 11 words per pixel.
pub fn global_bandwidth(cfg: &SystemConfig) -> f64 {
    let bits_per_frame =
        11.0 * cfg.iterations as f64 * 2.0 * (cfg.frame_pixels() * cfg.word_bits) as f64;
    bits_per_frame * cfg.fps / 8.0
}

/// On-chip bytes holding one tile: permeability maps, data and result.
pub fn tile_sram(cfg: &SystemConfig) -> f64 {
    tile_sram_for(cfg.tile_side, cfg.word_bits)
}

pub fn tile_sram_for(tile_side: usize, word_bits: usize) -> f64 {
    (4 * tile_side * tile_side * word_bits) as f64 / 8.0
}

/// `(tile_side, bytes)` pairs of on-chip memory against tile size.
pub fn memory_vs_tile_size(tile_sides: &[usize], word_bits: usize) -> Vec<(usize, f64)> {
    tile_sides
        .iter()
        .map(|&t| (t, tile_sram_for(t, word_bits)))
        .collect()
}

pub fn tile_count(cfg: &SystemConfig) -> usize {
    cfg.tile_cols() * cfg.tile_rows()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DividerBudget {
    pub divisions_per_s: f64,
    /// `2 * divisions_per_s / core_freq`: dividers are only busy in the backward half.
    pub dividers_fractional: f64,
    pub min_dividers: usize,
    /// Nearest integer, the figure usually quoted (10 for the HD defaults).
    pub dividers_rounded: usize,
}

/// One division per pixel per pass; divisions happen only during backward recursions.
pub fn divider_budget(cfg: &SystemConfig) -> DividerBudget {
    let per_frame = (tile_count(cfg) * cfg.tile_side * cfg.tile_side * 2 * cfg.iterations) as f64;
    let divisions_per_s = cfg.fps * per_frame;
    let dividers_fractional = 2.0 * divisions_per_s / cfg.core_freq;
    DividerBudget {
        divisions_per_s,
        dividers_fractional,
        min_dividers: dividers_fractional.ceil() as usize,
        dividers_rounded: dividers_fractional.round() as usize,
    }
}

/// Per-frame off-chip traffic of the tiled filter, by component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrafficBreakdown {
    /// Data channel streamed in (new pixels only; overlapping pixels stay on chip).
    pub input_data_bytes: f64,
    /// Horizontal permeabilities streamed in.
    pub input_pi_x_bytes: f64,
    /// Vertical permeabilities streamed in.
    pub input_pi_y_bytes: f64,
    /// Final blended output written once.
    pub output_bytes: f64,
    /// Partially blended tile rows written out and read back between tile rows.
    pub partial_blend_bytes: f64,
}

impl TrafficBreakdown {
    pub fn total(&self) -> f64 {
        self.input_data_bytes
            + self.input_pi_x_bytes
            + self.input_pi_y_bytes
            + self.output_bytes
            + self.partial_blend_bytes
    }
}

/// Off-chip traffic of one frame under the snake traversal.
///
/// The first tile loads all `T^2` pixels of each input map; every later
/// step (horizontal, or downward at a row switch) loads only the `S x T`
/// strip that replaces the evicted third. Tile rows overlap by `T - S`
/// lines; that band of partial blend results is written out after one tile
/// row and read back for the next.
pub fn traffic_breakdown(cfg: &SystemConfig) -> TrafficBreakdown {
    let bytes_per_word = cfg.word_bits as f64 / 8.0;
    let tiles = tile_count(cfg);
    let t = cfg.tile_side;
    let first = (t * t) as f64;
    let per_map_pixels = first + (tiles.saturating_sub(1) * cfg.step * t) as f64;
    let per_map = per_map_pixels * bytes_per_word;
    let band_pixels = ((t - cfg.step) * cfg.padded_width()) as f64;
    let partial = 2.0 * (cfg.tile_rows() - 1) as f64 * band_pixels * bytes_per_word;
    TrafficBreakdown {
        input_data_bytes: per_map,
        input_pi_x_bytes: per_map,
        input_pi_y_bytes: per_map,
        output_bytes: cfg.frame_pixels() as f64 * bytes_per_word,
        partial_blend_bytes: partial,
    }
}

/// `(bytes_per_frame, bytes_per_s)` of the tiled filter.
pub fn tiled_bandwidth(cfg: &SystemConfig) -> (f64, f64) {
    let per_frame = traffic_breakdown(cfg).total();
    (per_frame, per_frame * cfg.fps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub config: SystemConfig,
    pub working_memory_bits: u64,
    pub global_bandwidth_bytes_per_s: f64,
    pub tile_sram_bytes: f64,
    pub tile_count: usize,
    pub divisions_per_s: f64,
    pub dividers_fractional: f64,
    pub min_dividers: usize,
    pub dividers_rounded: usize,
    pub traffic: TrafficBreakdown,
    pub bytes_per_frame: f64,
    pub tiled_bandwidth_bytes_per_s: f64,
    /// Global over tiled traffic per frame, so independent of the frame rate.
    pub bandwidth_reduction_factor: f64,
}

pub fn model_report(cfg: &SystemConfig) -> ModelReport {
    let divider = divider_budget(cfg);
    let traffic = traffic_breakdown(cfg);
    let (bytes_per_frame, tiled_bps) = tiled_bandwidth(cfg);
    let global = global_bandwidth(cfg);
    let global_per_frame =
        11.0 * cfg.iterations as f64 * 2.0 * (cfg.frame_pixels() * cfg.word_bits) as f64 / 8.0;
    ModelReport {
        config: *cfg,
        working_memory_bits: working_memory(cfg),
        global_bandwidth_bytes_per_s: global,
        tile_sram_bytes: tile_sram(cfg),
        tile_count: tile_count(cfg),
        divisions_per_s: divider.divisions_per_s,
        dividers_fractional: divider.dividers_fractional,
        min_dividers: divider.min_dividers,
        dividers_rounded: divider.dividers_rounded,
        traffic,
        bytes_per_frame,
        tiled_bandwidth_bytes_per_s: tiled_bps,
        bandwidth_reduction_factor: global_per_frame / bytes_per_frame,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hd_defaults() {
        let cfg = SystemConfig::default();
        assert_eq!(working_memory(&cfg), 88_473_600);
        assert_eq!(global_bandwidth(&cfg), 6_082_560_000.0);
        assert_eq!(tile_sram(&cfg), 27_648.0);
        assert_eq!(tile_count(&cfg), 3354);
        let d = divider_budget(&cfg);
        assert_eq!(d.divisions_per_s, 1_545_523_200.0);
        assert_eq!(d.min_dividers, 11);
        assert_eq!(d.dividers_rounded, 10);
        assert!((d.dividers_fractional - 10.3035).abs() < 1e-3);
    }

    #[test]
    fn trivial_cases() {
        let one = SystemConfig {
            width: 1,
            height: 1,
            word_bits: 1,
            ..SystemConfig::default()
        };
        assert_eq!(working_memory(&one), 4);
        assert_eq!(tile_sram_for(1, 24), 12.0);
        let still = SystemConfig {
            fps: 0.0,
            ..SystemConfig::default()
        };
        assert_eq!(global_bandwidth(&still), 0.0);
        assert_eq!(tiled_bandwidth(&still).1, 0.0);
    }

    #[test]
    fn linear_scaling() {
        let cfg = SystemConfig::default();
        let wide = SystemConfig {
            word_bits: 48,
            ..cfg
        };
        assert_eq!(working_memory(&wide), 2 * working_memory(&cfg));
        let k1 = SystemConfig {
            iterations: 1,
            ..cfg
        };
        assert_eq!(global_bandwidth(&k1) * 4.0, global_bandwidth(&cfg));
        let fast = SystemConfig { fps: 50.0, ..cfg };
        assert_eq!(
            divider_budget(&fast).divisions_per_s,
            2.0 * divider_budget(&cfg).divisions_per_s
        );
    }

    #[test]
    fn grid_counts() {
        let cfg = SystemConfig {
            width: 48,
            height: 48,
            ..SystemConfig::default()
        };
        assert_eq!(tile_count(&cfg), 1);
        let strip = SystemConfig { width: 80, ..cfg };
        assert_eq!(tile_count(&strip), 3);
    }

    #[test]
    fn single_tile_traffic() {
        let cfg = SystemConfig {
            width: 48,
            height: 48,
            ..SystemConfig::default()
        };
        let t = traffic_breakdown(&cfg);
        let map = 48.0 * 48.0 * 3.0;
        assert_eq!(t.input_data_bytes, map);
        assert_eq!(t.input_pi_x_bytes, map);
        assert_eq!(t.input_pi_y_bytes, map);
        assert_eq!(t.output_bytes, map);
        assert_eq!(t.partial_blend_bytes, 0.0);
        assert_eq!(t.total(), 4.0 * map);
    }

    #[test]
    fn memory_curve_is_quadratic() {
        let curve = memory_vs_tile_size(&[12, 24, 48, 96], 24);
        for pair in curve.windows(2) {
            assert_eq!(pair[1].1, 4.0 * pair[0].1);
        }
        assert_eq!(curve[2], (48, 27_648.0));
    }
}
