//! Fragmented tile addressing.
//!
//! The tile buffer is split into 3 x 3 blocks of `S x S` pixels. When the
//! tile window moves by one step only one third of the buffer is replaced;
//! instead of shifting the retained two thirds, the logical-to-physical
//! block mapping is rotated. A state `(sx, sy)` gives the rotation along
//! each axis: logical block `b` lives in physical block `(b - s) mod 3`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FragState {
    pub sx: usize,
    pub sy: usize,
}

impl FragState {
    pub fn new(sx: usize, sy: usize) -> Result<Self> {
        if sx >= 3 || sy >= 3 {
            return Err(Error::input(format!(
                "fragment state ({sx}, {sy}) out of range"
            )));
        }
        Ok(Self { sx, sy })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FragDirection {
    Right,
    Left,
    Down,
}

impl FromStr for FragDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right" | "r" => Ok(FragDirection::Right),
            "left" | "l" => Ok(FragDirection::Left),
            "down" | "d" => Ok(FragDirection::Down),
            other => Err(Error::input(format!("unknown step direction '{other}'"))),
        }
    }
}

fn block_side(tile_side: usize) -> Result<usize> {
    if tile_side == 0 || !tile_side.is_multiple_of(3) {
        return Err(Error::input(format!(
            "tile side {tile_side} is not a multiple of 3"
        )));
    }
    Ok(tile_side / 3)
}

/// Physical `(row, col)` of logical pixel `(row, col)`.
pub fn frag_translate(
    state: FragState,
    logical: (usize, usize),
    tile_side: usize,
) -> Result<(usize, usize)> {
    let s = block_side(tile_side)?;
    let (r, c) = logical;
    if r >= tile_side || c >= tile_side {
        return Err(Error::input(format!(
            "({r}, {c}) lies outside a {tile_side}x{tile_side} tile"
        )));
    }
    let pr = ((r / s + 3 - state.sy) % 3) * s + r % s;
    let pc = ((c / s + 3 - state.sx) % 3) * s + c % s;
    Ok((pr, pc))
}

/// Logical `(row, col)` held at physical `(row, col)`.
pub fn frag_inverse(
    state: FragState,
    physical: (usize, usize),
    tile_side: usize,
) -> Result<(usize, usize)> {
    let inverse = FragState {
        sx: (3 - state.sx) % 3,
        sy: (3 - state.sy) % 3,
    };
    frag_translate(inverse, physical, tile_side)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragStep {
    pub state: FragState,
    /// Pixels kept in place.
    pub retained: usize,
    /// Physical `(row, col, height, width)` of the region overwritten by new data.
    pub replaced: (usize, usize, usize, usize),
}

/// Moves the window one step and reports which physical region is reloaded.
pub fn frag_step(state: FragState, dir: FragDirection, tile_side: usize) -> Result<FragStep> {
    let s = block_side(tile_side)?;
    let t = tile_side;
    let next = match dir {
        FragDirection::Left => FragState {
            sx: (state.sx + 1) % 3,
            ..state
        },
        FragDirection::Right => FragState {
            sx: (state.sx + 2) % 3,
            ..state
        },
        FragDirection::Down => FragState {
            sy: (state.sy + 2) % 3,
            ..state
        },
    };
    // The new third is the last logical block when moving right/down, the first when moving left.
    let replaced = match dir {
        FragDirection::Right => {
            let (_, pc) = frag_translate(next, (0, 2 * s), t)?;
            (0, pc, t, s)
        }
        FragDirection::Left => {
            let (_, pc) = frag_translate(next, (0, 0), t)?;
            (0, pc, t, s)
        }
        FragDirection::Down => {
            let (pr, _) = frag_translate(next, (2 * s, 0), t)?;
            (pr, 0, s, t)
        }
    };
    Ok(FragStep {
        state: next,
        retained: t * t - s * t,
        replaced,
    })
}

/// True when every retained pixel keeps its physical address across the step.
pub fn retained_in_place(state: FragState, dir: FragDirection, tile_side: usize) -> Result<bool> {
    let s = block_side(tile_side)?;
    let next = frag_step(state, dir, tile_side)?.state;
    for r in 0..tile_side {
        for c in 0..tile_side {
            // Logical position of the same image pixel after the move.
            let moved = match dir {
                FragDirection::Right if c >= s => (r, c - s),
                FragDirection::Left if c + s < tile_side => (r, c + s),
                FragDirection::Down if r >= s => (r - s, c),
                _ => continue,
            };
            if frag_translate(state, (r, c), tile_side)? != frag_translate(next, moved, tile_side)?
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Follows a snake traversal and rejects illegal step sequences.
#[derive(Clone, Debug, Default)]
pub struct FragTracker {
    state: FragState,
    last: Option<FragDirection>,
    /// Horizontal direction of the current tile row.
    heading: Option<FragDirection>,
    visited: Vec<FragState>,
}

impl FragTracker {
    pub fn new() -> Self {
        Self {
            visited: vec![FragState::default()],
            ..Self::default()
        }
    }

    pub fn state(&self) -> FragState {
        self.state
    }

    pub fn visited(&self) -> &[FragState] {
        &self.visited
    }

    pub fn step(&mut self, dir: FragDirection, tile_side: usize) -> Result<FragStep> {
        match (self.last, dir) {
            (Some(FragDirection::Down), FragDirection::Down) => {
                return Err(Error::input("two consecutive downward steps"));
            }
            (Some(FragDirection::Down), h) => {
                if Some(h) == self.heading {
                    return Err(Error::input(
                        "snake must reverse direction after a row switch",
                    ));
                }
            }
            (Some(prev), h) if h != FragDirection::Down && prev != h => {
                return Err(Error::input(
                    "horizontal direction reversed within a tile row",
                ));
            }
            _ => {}
        }
        let out = frag_step(self.state, dir, tile_side)?;
        if dir != FragDirection::Down {
            self.heading = Some(dir);
        }
        self.last = Some(dir);
        self.state = out.state;
        self.visited.push(out.state);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use FragDirection::*;

    #[test]
    fn translate_rotates_blocks() {
        let st = FragState::new(1, 0).unwrap();
        assert_eq!(frag_translate(st, (5, 3), 48).unwrap(), (5, 35));
        assert_eq!(frag_translate(st, (5, 16), 48).unwrap(), (5, 0));
        assert_eq!(
            frag_translate(FragState::default(), (7, 40), 48).unwrap(),
            (7, 40)
        );
        assert!(frag_translate(st, (48, 0), 48).is_err());
        assert!(frag_translate(st, (0, 0), 50).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        for sx in 0..3 {
            for sy in 0..3 {
                let st = FragState::new(sx, sy).unwrap();
                for (r, c) in [(0, 0), (17, 33), (47, 47), (20, 5)] {
                    let p = frag_translate(st, (r, c), 48).unwrap();
                    assert_eq!(frag_inverse(st, p, 48).unwrap(), (r, c));
                }
            }
        }
    }

    #[test]
    fn steps_keep_two_thirds_in_place() {
        for sx in 0..3 {
            for sy in 0..3 {
                let st = FragState::new(sx, sy).unwrap();
                for dir in [Right, Left, Down] {
                    assert!(retained_in_place(st, dir, 48).unwrap(), "{st:?} {dir:?}");
                    let step = frag_step(st, dir, 48).unwrap();
                    assert_eq!(step.retained, 1536);
                    let (_, _, h, w) = step.replaced;
                    assert_eq!(h * w, 48 * 16);
                }
            }
        }
    }

    #[test]
    fn three_steps_cycle_back() {
        for dir in [Right, Left, Down] {
            let mut st = FragState::new(2, 1).unwrap();
            for _ in 0..3 {
                st = frag_step(st, dir, 48).unwrap().state;
            }
            assert_eq!(st, FragState::new(2, 1).unwrap());
        }
    }

    #[test]
    fn snake_visits_every_state() {
        let mut tr = FragTracker::new();
        for dir in [Right, Right, Down, Left, Left, Down, Right, Right] {
            tr.step(dir, 48).unwrap();
        }
        let distinct: std::collections::HashSet<_> = tr.visited().iter().collect();
        assert_eq!(distinct.len(), 9);
    }

    #[test]
    fn tracker_rejects_bad_sequences() {
        let mut tr = FragTracker::new();
        tr.step(Right, 48).unwrap();
        assert!(tr.step(Left, 48).is_err());
        tr.step(Down, 48).unwrap();
        assert!(tr.step(Down, 48).is_err());
        assert!(tr.step(Right, 48).is_err());
        tr.step(Left, 48).unwrap();
    }
}
