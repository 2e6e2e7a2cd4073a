//! Cycle-level schedule of the recursion datapath inside the filter units.
//!
//! Each recursion step is an add followed by a multiply whose result feeds
//! the next add of the same line. With a pipeline register between adder
//! and multiplier that loop takes two cycles, so a single line can only
//! issue every other cycle; interleaving several independent lines fills
//! the gaps. The divider evaluates the combined output and is only busy
//! while backward recursions run.
//!
//! The FU follows a fixed time-multiplexed cadence: a group of `g` lines
//! shares a frame of `max(g, latency)` cycles and lane `i` owns slot `i`
//! of every frame. Unused slots are bubbles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hw::config::SystemConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Samples per line (tile edge).
    pub line_len: usize,
    /// Lines per pass (tile edge).
    pub lines: usize,
    pub num_fus: usize,
    pub interleave_depth: usize,
    /// Register between adder and multiplier (two-cycle feedback loop).
    pub pipeline_register: bool,
    /// Filter passes to schedule back to back (`2K` for a whole tile).
    pub passes: usize,
    /// Wait for the last divider result of a pass before starting the next.
    pub drain_between_passes: bool,
}

impl PipelineConfig {
    /// A whole tile: `2K` passes over `T` lines of `T` samples.
    pub fn from_system(cfg: &SystemConfig) -> Self {
        Self {
            line_len: cfg.tile_side,
            lines: cfg.tile_side,
            num_fus: cfg.num_fus,
            interleave_depth: cfg.interleave_depth,
            pipeline_register: true,
            passes: 2 * cfg.iterations,
            drain_between_passes: false,
        }
    }

    fn loop_latency(&self) -> usize {
        if self.pipeline_register {
            2
        } else {
            1
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitBusy {
    pub adder: usize,
    pub multiplier: usize,
    pub divider: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    /// Cycles from the first issue to the last divider result.
    pub cycles: usize,
    /// Busy cycles summed over all FUs.
    pub busy: UnitBusy,
    pub adder_utilization: f64,
    pub multiplier_utilization: f64,
    pub divider_utilization: f64,
    /// Multiplications performed (data and normalization recursion each).
    pub multiply_ops: usize,
    /// Issue slots left empty, summed over all FUs.
    pub bubbles: usize,
}

/// Schedules every FU and returns per-unit-class utilization.
pub fn simulate_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport> {
    if cfg.line_len == 0 || cfg.lines == 0 || cfg.num_fus == 0 || cfg.interleave_depth == 0 {
        return Err(Error::input("pipeline dimensions must be positive"));
    }
    if !cfg.lines.is_multiple_of(cfg.num_fus) {
        return Err(Error::input(format!(
            "{} lines do not split evenly over {} FUs",
            cfg.lines, cfg.num_fus
        )));
    }
    let per_fu = cfg.lines / cfg.num_fus;
    let n = cfg.line_len;
    let ops_per_line = 2 * n; // forward then backward recursion
    let latency = cfg.loop_latency();
    // Issue -> adder -> (register) -> multiplier -> divider.
    let div_stage = latency;

    let mut busy = UnitBusy::default();
    let mut end = 0usize;
    let mut bubbles = 0usize;
    let mut issued = 0usize;
    // Every FU runs the same schedule on its own lines; simulate each anyway.
    for _fu in 0..cfg.num_fus {
        let mut t = 0usize;
        let mut last_result = 0usize;
        for _pass in 0..cfg.passes {
            let mut start = 0;
            while start < per_fu {
                let group = cfg.interleave_depth.min(per_fu - start);
                let frame = group.max(latency);
                let mut ready_at = vec![t; group];
                for op in 0..ops_per_line {
                    for slot in 0..frame {
                        if let Some(ready) = ready_at.get_mut(slot) {
                            if *ready > t {
                                return Err(Error::Internal(format!(
                                    "lane {slot} issued at cycle {t} before its operand was ready"
                                )));
                            }
                            busy.adder += 1;
                            busy.multiplier += 1;
                            let mut done = t + latency;
                            if op >= n {
                                busy.divider += 1;
                                done = t + div_stage + 1;
                            }
                            last_result = last_result.max(done);
                            *ready = t + latency;
                            issued += 1;
                        } else {
                            bubbles += 1;
                        }
                        t += 1;
                    }
                }
                start += group;
            }
            if cfg.drain_between_passes && last_result > t {
                bubbles += last_result - t;
                t = last_result;
            }
        }
        end = end.max(t).max(last_result);
    }
    let total = (end * cfg.num_fus) as f64;
    Ok(PipelineReport {
        config: *cfg,
        cycles: end,
        busy,
        adder_utilization: busy.adder as f64 / total,
        multiplier_utilization: busy.multiplier as f64 / total,
        divider_utilization: busy.divider as f64 / total,
        multiply_ops: 2 * issued,
        bubbles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tile(depth: usize, register: bool) -> PipelineConfig {
        PipelineConfig {
            interleave_depth: depth,
            pipeline_register: register,
            ..PipelineConfig::from_system(&SystemConfig::default())
        }
    }

    #[test]
    fn two_way_interleaving_fills_the_pipeline() {
        let r = simulate_pipeline(&tile(2, true)).unwrap();
        assert_eq!(r.bubbles, 0);
        assert_eq!(r.cycles, 8 * 4 * 96 + 2);
        assert!(r.adder_utilization > 0.999);
        assert!(r.multiplier_utilization >= 0.99);
        assert!((r.divider_utilization - 0.499).abs() <= 0.01);
    }

    #[test]
    fn single_line_halves_utilization() {
        let r = simulate_pipeline(&tile(1, true)).unwrap();
        assert!(r.adder_utilization <= 0.5);
        assert!(r.multiplier_utilization <= 0.5);
        assert!(r.adder_utilization > 0.499);
    }

    #[test]
    fn no_register_needs_no_interleaving() {
        let r = simulate_pipeline(&tile(1, false)).unwrap();
        assert_eq!(r.bubbles, 0);
        assert!(r.adder_utilization > 0.999);
    }

    #[test]
    fn multiply_count_matches_recursions() {
        let cfg = tile(2, true);
        let r = simulate_pipeline(&cfg).unwrap();
        // 2 multiplies per pixel per recursion direction per pass.
        assert_eq!(r.multiply_ops, 2 * 2 * 48 * 48 * cfg.passes);
    }

    #[test]
    fn draining_passes_costs_a_few_cycles() {
        let cfg = PipelineConfig {
            drain_between_passes: true,
            ..tile(2, true)
        };
        let r = simulate_pipeline(&cfg).unwrap();
        assert_eq!(r.cycles, 8 * (4 * 96 + 2));
        assert!(r.adder_utilization > 0.99 && r.adder_utilization < 0.999);
    }

    #[test]
    fn deeper_interleaving_keeps_full_issue() {
        let r = simulate_pipeline(&tile(4, true)).unwrap();
        assert_eq!(r.bubbles, 0);
        let r = simulate_pipeline(&tile(3, true)).unwrap();
        // Groups of 3 and 1 lines: the single line runs at half rate.
        assert_eq!(r.bubbles, 12 * 8 * 96);
    }

    #[test]
    fn rejects_uneven_split() {
        let cfg = PipelineConfig {
            lines: 50,
            ..tile(2, true)
        };
        assert!(simulate_pipeline(&cfg).is_err());
    }
}
