//! Cycle-level model of parallel tile-SRAM reads during row and column passes.
//!
//! A tile is split into `square x square` pixel squares `s(i, j)` (square row
//! `i`, square column `j`) and each square lives in one SRAM bank. FU `f`
//! of a batch owns one square row (horizontal pass) or one square column
//! (vertical pass) and walks its two lines in an interleaved manner: the
//! even line in even cycles, the odd line in odd cycles.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hw::config::SystemConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BankMap {
    /// `bank(i, j) = (i + j) mod banks`
    Checkerboard,
    /// `bank(i, j) = i mod banks`: whole square rows share a bank.
    RowMajor,
}

impl BankMap {
    #[inline]
    pub fn bank(self, i: usize, j: usize, num_banks: usize) -> usize {
        match self {
            BankMap::Checkerboard => (i + j) % num_banks,
            BankMap::RowMajor => i % num_banks,
        }
    }
}

impl FromStr for BankMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "checkerboard" => Ok(BankMap::Checkerboard),
            "row-major" | "rowmajor" => Ok(BankMap::RowMajor),
            other => Err(Error::input(format!("unknown bank map '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PassDirection {
    Horizontal,
    Vertical,
}

impl FromStr for PassDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "horizontal" | "x" => Ok(PassDirection::Horizontal),
            "vertical" | "y" => Ok(PassDirection::Vertical),
            other => Err(Error::input(format!("unknown pass direction '{other}'"))),
        }
    }
}

/// One SRAM read issued by one FU.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessRecord {
    pub cycle: usize,
    pub fu: usize,
    pub bank: usize,
    pub address: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankSimResult {
    pub map: BankMap,
    pub direction: PassDirection,
    pub cycles: usize,
    /// Cycles in which at least two FUs addressed the same bank.
    pub conflict_cycles: usize,
    /// Largest number of FUs hitting one bank in a single cycle.
    pub worst_fanin: usize,
    #[serde(skip)]
    pub trace: Vec<AccessRecord>,
}

/// Word address of every square inside its bank: squares of one bank are
/// numbered in row-major order and each holds `square^2` consecutive words.
fn bank_addresses(map: BankMap, squares: usize, num_banks: usize) -> Vec<usize> {
    let mut next = vec![0usize; num_banks];
    let mut base = vec![0usize; squares * squares];
    for i in 0..squares {
        for j in 0..squares {
            let b = map.bank(i, j, num_banks);
            base[i * squares + j] = next[b];
            next[b] += 1;
        }
    }
    base
}

/// Simulates the reads of one forward and one backward sweep over a tile.
pub fn simulate_bank_access(
    cfg: &SystemConfig,
    direction: PassDirection,
    map: BankMap,
    keep_trace: bool,
) -> Result<BankSimResult> {
    let t = cfg.tile_side;
    let sq = cfg.square;
    if t == 0 || sq == 0 || !t.is_multiple_of(sq) {
        return Err(Error::input(format!(
            "tile side {t} is not a multiple of the square size {sq}"
        )));
    }
    if cfg.num_fus == 0 || cfg.num_banks < cfg.num_fus {
        return Err(Error::input("need at least one bank per FU"));
    }
    let squares = t / sq;
    let addr_base = bank_addresses(map, squares, cfg.num_banks);
    let batches = squares.div_ceil(cfg.num_fus);
    // Each sweep visits `t` positions along `sq` interleaved lines.
    let sweep_cycles = t * sq;

    let mut cycle = 0usize;
    let mut conflict_cycles = 0usize;
    let mut worst_fanin = 0usize;
    let mut trace = Vec::new();
    let mut hits = vec![0usize; cfg.num_banks];
    for batch in 0..batches {
        for backward in [false, true] {
            for step in 0..sweep_cycles {
                hits.iter_mut().for_each(|h| *h = 0);
                let pos = if backward {
                    t - 1 - step / sq
                } else {
                    step / sq
                };
                let lane = step % sq;
                for fu in 0..cfg.num_fus {
                    let owned = batch * cfg.num_fus + fu;
                    if owned >= squares {
                        continue;
                    }
                    // (pixel row, pixel column) in tile coordinates.
                    let (py, px) = match direction {
                        PassDirection::Horizontal => (owned * sq + lane, pos),
                        PassDirection::Vertical => (pos, owned * sq + lane),
                    };
                    let (i, j) = (py / sq, px / sq);
                    let bank = map.bank(i, j, cfg.num_banks);
                    hits[bank] += 1;
                    if keep_trace {
                        let address =
                            addr_base[i * squares + j] * sq * sq + (py % sq) * sq + px % sq;
                        trace.push(AccessRecord {
                            cycle,
                            fu,
                            bank,
                            address,
                        });
                    }
                }
                let fanin = hits.iter().copied().max().unwrap_or(0);
                worst_fanin = worst_fanin.max(fanin);
                if fanin > 1 {
                    conflict_cycles += 1;
                }
                cycle += 1;
            }
        }
    }
    Ok(BankSimResult {
        map,
        direction,
        cycles: cycle,
        conflict_cycles,
        worst_fanin,
        trace,
    })
}

/// Writes a trace as CSV with columns `cycle,fu,bank,address`.
pub fn write_access_trace<W: Write>(trace: &[AccessRecord], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for rec in trace {
        wtr.serialize(rec)?;
    }
    wtr.flush()?;
    Ok(())
}
