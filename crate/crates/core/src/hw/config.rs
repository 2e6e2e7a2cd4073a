use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the modeled accelerator and the video stream it processes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub width: usize,
    pub height: usize,
    /// Storage width of one sample in bits.
    pub word_bits: usize,
    /// PF iterations (XY-passes) per frame.
    pub iterations: usize,
    /// Frames per second.
    pub fps: f64,
    /// Core clock in Hz.
    pub core_freq: f64,
    pub tile_side: usize,
    pub step: usize,
    pub num_fus: usize,
    pub num_banks: usize,
    /// Edge of the pixel squares assigned to SRAM banks.
    pub square: usize,
    /// Lines each FU processes in an interleaved manner.
    pub interleave_depth: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            width: 1280,
            height: 720,
            word_bits: 24,
            iterations: 4,
            fps: 25.0,
            core_freq: 300e6,
            tile_side: 48,
            step: 16,
            num_fus: 12,
            num_banks: 12,
            square: 2,
            interleave_depth: 2,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("width", self.width),
            ("height", self.height),
            ("word_bits", self.word_bits),
            ("iterations", self.iterations),
            ("tile_side", self.tile_side),
            ("step", self.step),
            ("num_fus", self.num_fus),
            ("num_banks", self.num_banks),
            ("square", self.square),
            ("interleave_depth", self.interleave_depth),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::input(format!("{name} must be positive")));
        }
        if !(self.fps >= 0.0 && self.fps.is_finite()) {
            return Err(Error::input(format!(
                "fps must be non-negative, got {}",
                self.fps
            )));
        }
        if !(self.core_freq > 0.0 && self.core_freq.is_finite()) {
            return Err(Error::input(format!(
                "core frequency must be positive, got {}",
                self.core_freq
            )));
        }
        if self.tile_side != 3 * self.step {
            return Err(Error::input(format!(
                "tile side {} must be three times the step {}",
                self.tile_side, self.step
            )));
        }
        if self.num_banks < self.num_fus {
            return Err(Error::input(format!(
                "{} banks cannot serve {} FUs",
                self.num_banks, self.num_fus
            )));
        }
        Ok(())
    }

    /// Pixels of one frame.
    pub fn frame_pixels(&self) -> usize {
        self.width * self.height
    }

    /// Tiles along one axis of length `len` (frames not tiled exactly are padded).
    pub fn tiles_along(&self, len: usize) -> usize {
        if len <= self.tile_side {
            1
        } else {
            (len - self.tile_side).div_ceil(self.step) + 1
        }
    }

    pub fn tile_cols(&self) -> usize {
        self.tiles_along(self.width)
    }

    pub fn tile_rows(&self) -> usize {
        self.tiles_along(self.height)
    }

    /// Frame width after padding to the tile grid.
    pub fn padded_width(&self) -> usize {
        self.tile_side + (self.tile_cols() - 1) * self.step
    }
}
