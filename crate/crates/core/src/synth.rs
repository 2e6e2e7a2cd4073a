//! Deterministic synthetic test data: an SDR scene, an HDR scene with a
//! wide dynamic range and dense optical flow with motion boundaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::{FlowField, Image2D};

/// Octaves covered by [`hdr_scene`].
pub const HDR_OCTAVES: f64 = 20.0;

struct Disc {
    cx: f64,
    cy: f64,
    r: f64,
    value: f64,
}

fn discs(rng: &mut ChaCha8Rng, w: usize, h: usize, count: usize) -> Vec<Disc> {
    let scale = w.min(h) as f64;
    (0..count)
        .map(|_| Disc {
            cx: rng.gen_range(0.0..w as f64),
            cy: rng.gen_range(0.0..h as f64),
            r: rng.gen_range(0.06..0.22) * scale,
            value: rng.gen_range(0.0..1.0),
        })
        .collect()
}

/// Piecewise-smooth image in [0, 1]: a shaded background, overlapping discs
/// and rectangles with sharp edges, plus mild noise.
pub fn sdr_scene(width: usize, height: usize, seed: u64) -> Image2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = discs(&mut rng, width, height, 10);
    let rects: Vec<(usize, usize, usize, usize, f64)> = (0..4)
        .map(|_| {
            let x0 = rng.gen_range(0..width);
            let y0 = rng.gen_range(0..height);
            let rw = rng.gen_range(1..=width / 3 + 1);
            let rh = rng.gen_range(1..=height / 3 + 1);
            (x0, y0, rw, rh, rng.gen_range(0.0..1.0))
        })
        .collect();
    let mut img = Image2D::from_fn(width, height, |x, y| {
        let fx = x as f64 / width as f64;
        let fy = y as f64 / height as f64;
        let mut v = 0.25 + 0.35 * fx + 0.15 * (6.0 * fy).sin();
        for d in &shapes {
            let (dx, dy) = (x as f64 - d.cx, y as f64 - d.cy);
            if dx * dx + dy * dy <= d.r * d.r {
                v = d.value;
            }
        }
        for &(x0, y0, rw, rh, value) in &rects {
            if (x0..x0 + rw).contains(&x) && (y0..y0 + rh).contains(&y) {
                v = value;
            }
        }
        v
    });
    for v in img.data_mut() {
        *v = (*v + rng.gen_range(-0.02..0.02)).clamp(0.0, 1.0);
    }
    img
}

/// Radiance map in `[2^-20, 1]`: the SDR layout with each region mapped to
/// an exposure between 2^-20 and 1. Both ends of the range are attained.
pub fn hdr_scene(width: usize, height: usize, seed: u64) -> Image2D {
    let sdr = sdr_scene(width, height, seed);
    let (lo, hi) = sdr.min_max();
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    sdr.map(|v| (HDR_OCTAVES * ((v - lo) / span - 1.0)).exp2())
}

/// Guide for HDR data: log2 radiance normalized to [0, 1].
pub fn log_guide(hdr: &Image2D) -> Image2D {
    let (lo, hi) = hdr.map(f64::log2).min_max();
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    hdr.map(|v| (v.log2() - lo) / span)
}

/// Dense flow: a smooth rotating background with objects translating on
/// top, so the field has motion boundaries aligned with the returned guide.
pub fn flow_scene(width: usize, height: usize, seed: u64) -> (Image2D, FlowField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let guide = sdr_scene(width, height, seed ^ 0x5eed);
    let objects: Vec<(Disc, f64, f64)> = discs(&mut rng, width, height, 5)
        .into_iter()
        .map(|d| (d, rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0)))
        .collect();
    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    let omega = 0.02;
    let mut u = Image2D::zeros(width, height);
    let mut v = Image2D::zeros(width, height);
    let mut g = guide;
    for y in 0..height {
        for x in 0..width {
            let (px, py) = (x as f64, y as f64);
            let mut fu = -omega * (py - cy) + 0.5;
            let mut fv = omega * (px - cx) - 0.25;
            for (d, ou, ov) in &objects {
                let (dx, dy) = (px - d.cx, py - d.cy);
                if dx * dx + dy * dy <= d.r * d.r {
                    fu = *ou;
                    fv = *ov;
                    g.set(x, y, d.value);
                }
            }
            u.set(x, y, fu + rng.gen_range(-0.05..0.05));
            v.set(x, y, fv + rng.gen_range(-0.05..0.05));
        }
    }
    (g, FlowField { u, v })
}
