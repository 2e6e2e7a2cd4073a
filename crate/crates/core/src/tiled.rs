//! Tiled permeability filter: overlapping square tiles filtered independently
//! and blended back together with a separable tent profile.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::image::Image2D;
use crate::permeability::PermeabilityPair;
use crate::scanline::{pf_iterate, Compensated, FilterParams, LineKernel};

pub const DEFAULT_TILE_SIDE: usize = 48;

/// Fraction of the tile edge shared by horizontally or vertically adjacent tiles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Overlap {
    Half,
    ThreeFifths,
    #[default]
    TwoThirds,
}

impl Overlap {
    pub const ALL: [Overlap; 3] = [Overlap::Half, Overlap::ThreeFifths, Overlap::TwoThirds];

    pub fn ratio(self) -> (usize, usize) {
        match self {
            Overlap::Half => (1, 2),
            Overlap::ThreeFifths => (3, 5),
            Overlap::TwoThirds => (2, 3),
        }
    }

    /// Tile step for edge length `tile_side`, rounded to the nearest pixel.
    pub fn step(self, tile_side: usize) -> usize {
        let (num, den) = self.ratio();
        let keep = den - num;
        (tile_side * keep * 2 + den) / (2 * den)
    }
}

impl std::fmt::Display for Overlap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (n, d) = self.ratio();
        write!(f, "{n}/{d}")
    }
}

impl FromStr for Overlap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1/2" => Ok(Overlap::Half),
            "3/5" => Ok(Overlap::ThreeFifths),
            "2/3" => Ok(Overlap::TwoThirds),
            other => Err(Error::input(format!(
                "unsupported overlap '{other}' (expected 1/2, 3/5 or 2/3)"
            ))),
        }
    }
}

/// Tile edge length and the step between neighbouring tile origins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileGeometry {
    pub tile_side: usize,
    pub step: usize,
}

impl Default for TileGeometry {
    fn default() -> Self {
        Self {
            tile_side: DEFAULT_TILE_SIDE,
            step: DEFAULT_TILE_SIDE / 3,
        }
    }
}

impl TileGeometry {
    /// Tiles of side `tile_side` overlapping by 2/3; `tile_side` must be a multiple of 3.
    pub fn new(tile_side: usize) -> Result<Self> {
        if tile_side == 0 || !tile_side.is_multiple_of(3) {
            return Err(Error::input(format!(
                "tile side must be a positive multiple of 3, got {tile_side}"
            )));
        }
        Ok(Self {
            tile_side,
            step: tile_side / 3,
        })
    }

    pub fn with_overlap(tile_side: usize, overlap: Overlap) -> Result<Self> {
        if overlap == Overlap::TwoThirds {
            return Self::new(tile_side);
        }
        let step = overlap.step(tile_side);
        if tile_side == 0 || step == 0 {
            return Err(Error::input(format!(
                "tile side {tile_side} too small for overlap {overlap}"
            )));
        }
        Ok(Self { tile_side, step })
    }

    /// Smallest extent `>= len` (and `>= tile_side`) that the grid tiles exactly.
    pub fn padded_len(&self, len: usize) -> usize {
        if len <= self.tile_side {
            self.tile_side
        } else {
            let extra = len - self.tile_side;
            self.tile_side + extra.div_ceil(self.step) * self.step
        }
    }

    pub fn fits(&self, len: usize) -> bool {
        len >= self.tile_side && (len - self.tile_side).is_multiple_of(self.step)
    }
}

/// A tile grid over a concrete image extent, with origins in snake order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileGrid {
    pub geometry: TileGeometry,
    pub width: usize,
    pub height: usize,
    pub cols: usize,
    pub rows: usize,
    /// Top-left tile corners: left to right on even tile rows, right to left on odd ones.
    pub traversal: Vec<(usize, usize)>,
}

impl TileGrid {
    pub fn tile_count(&self) -> usize {
        self.traversal.len()
    }

    /// Number of tiles covering pixel `(x, y)`.
    pub fn coverage(&self, x: usize, y: usize) -> usize {
        let t = self.geometry.tile_side;
        self.traversal
            .iter()
            .filter(|&&(ox, oy)| x >= ox && x < ox + t && y >= oy && y < oy + t)
            .count()
    }
}

pub fn build_tile_grid(width: usize, height: usize, geometry: &TileGeometry) -> Result<TileGrid> {
    let TileGeometry { tile_side, step } = *geometry;
    if tile_side == 0 || step == 0 || step > tile_side {
        return Err(Error::input(format!(
            "invalid tile geometry: side {tile_side}, step {step}"
        )));
    }
    if width < tile_side || height < tile_side {
        return Err(Error::input(format!(
            "{width}x{height} image is smaller than one {tile_side}x{tile_side} tile"
        )));
    }
    if !geometry.fits(width) || !geometry.fits(height) {
        return Err(Error::input(format!(
            "{width}x{height} is not tiled exactly by {tile_side}-pixel tiles with step {step}"
        )));
    }
    let cols = (width - tile_side) / step + 1;
    let rows = (height - tile_side) / step + 1;
    let mut traversal = Vec::with_capacity(cols * rows);
    for r in 0..rows {
        let y = r * step;
        if r % 2 == 0 {
            traversal.extend((0..cols).map(|c| (c * step, y)));
        } else {
            traversal.extend((0..cols).rev().map(|c| (c * step, y)));
        }
    }
    Ok(TileGrid {
        geometry: *geometry,
        width,
        height,
        cols,
        rows,
        traversal,
    })
}

/// Separable 1D blending weights; the 2D weight of `(x, y)` is `w[x] * w[y]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlendProfile {
    pub weights: Vec<f64>,
}

/// Integer tent `w[d] = min(d + 1, T - d)`.
pub fn blend_weights(tile_side: usize) -> BlendProfile {
    BlendProfile {
        weights: (0..tile_side)
            .map(|d| (d + 1).min(tile_side - d) as f64)
            .collect(),
    }
}

impl BlendProfile {
    pub fn scaled(&self, factor: f64) -> BlendProfile {
        BlendProfile {
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }
}

/// Blend target for the tiles of one grid.
///
/// Weighted tile values are summed in double-double and divided by the
/// per-pixel weight total once in [`finalize`](Self::finalize), so a pixel
/// covered by a single tile, or by tiles that agree, receives that value
/// exactly.
#[derive(Clone, Debug)]
pub struct Accumulator {
    width: usize,
    height: usize,
    blended: Vec<Dd>,
    weight_sum: Image2D,
}

impl Accumulator {
    pub fn for_grid(grid: &TileGrid, profile: &BlendProfile) -> Result<Self> {
        let t = grid.geometry.tile_side;
        if profile.weights.len() != t {
            return Err(Error::input(format!(
                "blend profile has {} weights for {t}-pixel tiles",
                profile.weights.len()
            )));
        }
        let mut weight_sum = Image2D::zeros(grid.width, grid.height);
        for &(ox, oy) in &grid.traversal {
            for (dy, wy) in profile.weights.iter().enumerate() {
                for (dx, wx) in profile.weights.iter().enumerate() {
                    let (x, y) = (ox + dx, oy + dy);
                    weight_sum.set(x, y, weight_sum.get(x, y) + wx * wy);
                }
            }
        }
        Ok(Self {
            width: grid.width,
            height: grid.height,
            blended: vec![Dd::ZERO; grid.width * grid.height],
            weight_sum,
        })
    }

    pub fn weight_sum(&self) -> &Image2D {
        &self.weight_sum
    }

    /// Adds `w[x] * w[y] * tile` over the tile's footprint.
    pub fn merge_tile(
        &mut self,
        tile: &Image2D,
        origin: (usize, usize),
        profile: &BlendProfile,
    ) -> Result<()> {
        let (ox, oy) = origin;
        let t = profile.weights.len();
        if tile.width() != t || tile.height() != t {
            return Err(Error::input(format!(
                "tile is {}x{}, blend profile expects {t}x{t}",
                tile.width(),
                tile.height()
            )));
        }
        if ox + t > self.width || oy + t > self.height {
            return Err(Error::input(format!(
                "tile at ({ox}, {oy}) exceeds the {}x{} accumulator",
                self.width, self.height
            )));
        }
        for (dy, wy) in profile.weights.iter().enumerate() {
            let row = (oy + dy) * self.width + ox;
            for (dx, wx) in profile.weights.iter().enumerate() {
                let acc = &mut self.blended[row + dx];
                *acc = acc.add(Dd::product(wx * wy, tile.get(dx, dy)));
            }
        }
        Ok(())
    }

    pub fn finalize(self) -> Result<Image2D> {
        if let Some(idx) = self.weight_sum.data().iter().position(|&w| w <= 0.0) {
            return Err(Error::Internal(format!(
                "pixel ({}, {}) is not covered by any tile",
                idx % self.width,
                idx / self.width
            )));
        }
        let data = self
            .blended
            .iter()
            .zip(self.weight_sum.data())
            .map(|(sum, &w)| sum.div_to_f64(Dd::from_f64(w)))
            .collect();
        Image2D::new(self.width, self.height, data)
    }
}

/// Filters one tile in isolation: `pi_tile` must already have its border entries zeroed.
pub fn filter_tile(
    pi_tile: &PermeabilityPair,
    a_tile: &Image2D,
    params: &FilterParams,
) -> Result<Image2D> {
    crate::scanline::pf_global(pi_tile, a_tile, params)
}

pub(crate) fn tpf_on_grid<K: LineKernel + ?Sized>(
    kernel: &K,
    pi: &PermeabilityPair,
    a: &Image2D,
    params: &FilterParams,
    grid: &TileGrid,
) -> Result<Image2D> {
    let t = grid.geometry.tile_side;
    let profile = blend_weights(t);
    let tiles = grid
        .traversal
        .par_iter()
        .map(|&(ox, oy)| {
            let pi_tile = pi.restrict(ox, oy, t, t)?;
            let a_tile = a.crop(ox, oy, t, t)?;
            Ok(pf_iterate(
                kernel,
                &pi_tile,
                &a_tile,
                params.lambda,
                params.iterations,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = Accumulator::for_grid(grid, &profile)?;
    for (tile, &origin) in tiles.iter().zip(&grid.traversal) {
        acc.merge_tile(tile, origin, &profile)?;
    }
    acc.finalize()
}

/// Tiled filter on precomputed permeabilities. The extent must be tiled exactly.
pub fn tpf_with_permeabilities(
    pi: &PermeabilityPair,
    a: &Image2D,
    params: &FilterParams,
    geometry: &TileGeometry,
) -> Result<Image2D> {
    a.check_extent(pi.pi_x())?;
    let grid = build_tile_grid(a.width(), a.height(), geometry)?;
    tpf_on_grid(&Compensated, pi, a, params, &grid)
}

pub(crate) fn tpf_padded<K: LineKernel + ?Sized>(
    kernel: &K,
    guide: &Image2D,
    a: &Image2D,
    params: &FilterParams,
    geometry: &TileGeometry,
) -> Result<Image2D> {
    guide.check_extent(a)?;
    let (w, h) = (a.width(), a.height());
    let (pw, ph) = (geometry.padded_len(w), geometry.padded_len(h));
    let grid = build_tile_grid(pw, ph, geometry)?;
    if (pw, ph) == (w, h) {
        let pi = params.permeabilities(guide)?;
        return tpf_on_grid(kernel, &pi, a, params, &grid);
    }
    let guide_p = guide.pad_replicate(pw, ph);
    let a_p = a.pad_replicate(pw, ph);
    let pi = params.permeabilities(&guide_p)?;
    tpf_on_grid(kernel, &pi, &a_p, params, &grid)?.crop(0, 0, w, h)
}

/// The full tiled pipeline: permeabilities from `guide`, per-tile filtering,
/// blending. Extents the grid does not tile exactly are edge-replicated up to
/// the next valid size and cropped afterwards.
pub fn tpf(
    guide: &Image2D,
    a: &Image2D,
    params: &FilterParams,
    geometry: &TileGeometry,
) -> Result<Image2D> {
    if !(0.0..=1.0).contains(&params.lambda) {
        return Err(Error::input(format!(
            "lambda must lie in [0, 1], got {}",
            params.lambda
        )));
    }
    tpf_padded(&Compensated, guide, a, params, geometry)
}

/// Mean absolute difference between horizontally and vertically adjacent
/// pixels of `tiled - reference`: blocking seams show up as steps here.
pub fn seam_residual(tiled: &Image2D, reference: &Image2D) -> Result<f64> {
    tiled.check_extent(reference)?;
    let (w, h) = (tiled.width(), tiled.height());
    let d = |x, y| tiled.get(x, y) - reference.get(x, y);
    let mut total = 0.0;
    let mut count = 0usize;
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                total += (d(x + 1, y) - d(x, y)).abs();
                count += 1;
            }
            if y + 1 < h {
                total += (d(x, y + 1) - d(x, y)).abs();
                count += 1;
            }
        }
    }
    Ok(if count == 0 {
        0.0
    } else {
        total / count as f64
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    /// `"1/2"`, `"3/5"` or `"2/3"`.
    pub overlap: String,
    pub step: usize,
    /// Mean absolute deviation from the global filter.
    pub mean_abs_dev: f64,
    /// [`seam_residual`] against the global filter.
    pub seam_residual: f64,
}

/// Runs the tiled filter once per supported overlap and compares each result
/// with the global filter. Returns the reports and the filtered images.
pub fn overlap_sweep(
    guide: &Image2D,
    a: &Image2D,
    params: &FilterParams,
    tile_side: usize,
) -> Result<Vec<(OverlapReport, Image2D)>> {
    let global = crate::scanline::pf_global_guided(guide, a, params)?;
    Overlap::ALL
        .iter()
        .map(|&ov| {
            let geometry = TileGeometry::with_overlap(tile_side, ov)?;
            let out = tpf(guide, a, params, &geometry)?;
            let report = OverlapReport {
                overlap: ov.to_string(),
                step: geometry.step,
                mean_abs_dev: out.mean_abs_diff(&global)?,
                seam_residual: seam_residual(&out, &global)?,
            };
            Ok((report, out))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seam_residual_sees_steps_only() {
        let flat = Image2D::filled(6, 4, 0.5);
        let shifted = Image2D::filled(6, 4, 0.7);
        assert!(seam_residual(&shifted, &flat).unwrap().abs() < 1e-15);
        let step = Image2D::from_fn(6, 4, |x, _| if x < 3 { 0.5 } else { 1.5 });
        // One unit step on 4 of the 38 neighbour pairs.
        assert!((seam_residual(&step, &flat).unwrap() - 4.0 / 38.0).abs() < 1e-15);
    }

    #[test]
    fn overlap_sweep_covers_all_ratios() {
        let g = Image2D::from_fn(60, 52, |x, y| ((x / 7 + y / 5) % 3) as f64 / 2.0);
        let params = FilterParams::default();
        let out = overlap_sweep(&g, &g, &params, 24).unwrap();
        let names: Vec<_> = out.iter().map(|(r, _)| r.overlap.as_str()).collect();
        assert_eq!(names, ["1/2", "3/5", "2/3"]);
        assert_eq!(
            out.iter().map(|(r, _)| r.step).collect::<Vec<_>>(),
            [12, 10, 8]
        );
        assert!(out
            .iter()
            .all(|(r, img)| r.mean_abs_dev > 0.0 && img.width() == 60));
    }

    #[test]
    fn hd_grid_has_3354_tiles() {
        let grid = build_tile_grid(1280, 720, &TileGeometry::default()).unwrap();
        assert_eq!((grid.cols, grid.rows), (78, 43));
        assert_eq!(grid.tile_count(), 3354);
    }

    #[test]
    fn small_grids() {
        let g = TileGeometry::default();
        assert_eq!(build_tile_grid(48, 48, &g).unwrap().traversal, vec![(0, 0)]);
        let grid = build_tile_grid(80, 48, &g).unwrap();
        assert_eq!(grid.traversal, vec![(0, 0), (16, 0), (32, 0)]);
    }

    #[test]
    fn grid_errors() {
        let g = TileGeometry::default();
        assert!(build_tile_grid(47, 48, &g).is_err());
        assert!(build_tile_grid(50, 48, &g).is_err());
        assert!(TileGeometry::new(47).is_err());
        assert!(TileGeometry::new(0).is_err());
    }

    #[test]
    fn snake_order_steps_one_coordinate() {
        let grid = build_tile_grid(48 + 16 * 5, 48 + 16 * 3, &TileGeometry::default()).unwrap();
        assert_eq!(grid.traversal[5], (80, 0));
        assert_eq!(grid.traversal[6], (80, 16));
        for pair in grid.traversal.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let dx = a.0.abs_diff(b.0);
            let dy = a.1.abs_diff(b.1);
            assert!(
                (dx == 16 && dy == 0) || (dx == 0 && dy == 16),
                "{a:?} -> {b:?}"
            );
        }
    }

    #[test]
    fn tent_profile() {
        let p = blend_weights(48);
        assert_eq!(p.weights[0], 1.0);
        assert_eq!(p.weights[23], 24.0);
        assert_eq!(p.weights[24], 24.0);
        assert_eq!(p.weights[47], 1.0);
        assert_eq!(blend_weights(6).weights, vec![1.0, 2.0, 3.0, 3.0, 2.0, 1.0]);
        for d in 0..48 {
            assert_eq!(p.weights[d], p.weights[47 - d]);
        }
    }

    #[test]
    fn overlap_steps() {
        assert_eq!(Overlap::TwoThirds.step(48), 16);
        assert_eq!(Overlap::Half.step(48), 24);
        assert_eq!(Overlap::ThreeFifths.step(48), 19);
        assert_eq!("3/5".parse::<Overlap>().unwrap(), Overlap::ThreeFifths);
        assert!("1/3".parse::<Overlap>().is_err());
    }

    #[test]
    fn padded_lengths() {
        let g = TileGeometry::default();
        assert_eq!(g.padded_len(10), 48);
        assert_eq!(g.padded_len(48), 48);
        assert_eq!(g.padded_len(49), 64);
        assert_eq!(g.padded_len(1280), 1280);
        assert_eq!(g.padded_len(1920), 1920);
        assert_eq!(g.padded_len(1080), 1088);
    }

    #[test]
    fn merge_rejects_out_of_bounds() {
        let grid = build_tile_grid(48, 48, &TileGeometry::default()).unwrap();
        let profile = blend_weights(48);
        let mut acc = Accumulator::for_grid(&grid, &profile).unwrap();
        let tile = Image2D::zeros(48, 48);
        assert!(acc.merge_tile(&tile, (16, 0), &profile).is_err());
        assert!(acc
            .merge_tile(&Image2D::zeros(47, 48), (0, 0), &profile)
            .is_err());
    }

    #[test]
    fn interior_weight_sum_is_nine_tent_products() {
        let grid = build_tile_grid(112, 112, &TileGeometry::default()).unwrap();
        let profile = blend_weights(48);
        let acc = Accumulator::for_grid(&grid, &profile).unwrap();
        let (x, y) = (50, 57);
        assert_eq!(grid.coverage(x, y), 9);
        let mut expected = 0.0;
        for oy in [16, 32, 48] {
            for ox in [16, 32, 48] {
                expected += profile.weights[x - ox] * profile.weights[y - oy];
            }
        }
        assert_eq!(acc.weight_sum().get(x, y), expected);
        assert!(expected > 0.0);
    }

    #[test]
    fn single_tile_round_trip_is_exact() {
        let grid = build_tile_grid(48, 48, &TileGeometry::default()).unwrap();
        let profile = blend_weights(48);
        let mut acc = Accumulator::for_grid(&grid, &profile).unwrap();
        let tile = Image2D::from_fn(48, 48, |x, y| ((x * 31 + y * 17) % 97) as f64 / 97.0);
        acc.merge_tile(&tile, (0, 0), &profile).unwrap();
        assert_eq!(acc.finalize().unwrap(), tile);
    }
}
