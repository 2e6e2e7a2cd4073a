//! Row-major single-channel image container.

use crate::error::{Error, Result};

/// A `width` x `height` grid of `f64` samples stored row by row.
#[derive(Clone, Debug, PartialEq)]
pub struct Image2D {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image2D {
    /// Wraps `data`, rejecting empty extents, length mismatches and non-finite samples.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::input(format!(
                "image extent must be at least 1x1, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::input(format!(
                "image data has {} samples, expected {}",
                data.len(),
                width * height
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite sample {} at ({}, {})",
                data[idx],
                idx % width,
                idx / width
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image extent must be non-zero");
        assert!(value.is_finite());
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image extent must be non-zero");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.width)
    }

    pub fn same_extent(&self, other: &Image2D) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Returns `Error::Dimension` unless `other` has the same extent as `self`.
    pub fn check_extent(&self, other: &Image2D) -> Result<()> {
        if self.same_extent(other) {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected_width: self.width,
                expected_height: self.height,
                width: other.width,
                height: other.height,
            })
        }
    }

    pub fn transpose(&self) -> Image2D {
        let mut data = Vec::with_capacity(self.data.len());
        for x in 0..self.width {
            for y in 0..self.height {
                data.push(self.get(x, y));
            }
        }
        Image2D {
            width: self.height,
            height: self.width,
            data,
        }
    }

    pub fn mirror_horizontal(&self) -> Image2D {
        Image2D::from_fn(self.width, self.height, |x, y| {
            self.get(self.width - 1 - x, y)
        })
    }

    /// Copies the `width` x `height` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Image2D> {
        if width == 0 || height == 0 || x0 + width > self.width || y0 + height > self.height {
            return Err(Error::input(format!(
                "window {width}x{height} at ({x0}, {y0}) exceeds {}x{} image",
                self.width, self.height
            )));
        }
        Ok(Image2D::from_fn(width, height, |x, y| {
            self.get(x0 + x, y0 + y)
        }))
    }

    /// Extends the image to `width` x `height` by replicating the last column and row.
    pub fn pad_replicate(&self, width: usize, height: usize) -> Image2D {
        assert!(width >= self.width && height >= self.height);
        Image2D::from_fn(width, height, |x, y| {
            self.get(x.min(self.width - 1), y.min(self.height - 1))
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image2D {
        Image2D {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn mean_abs_diff(&self, other: &Image2D) -> Result<f64> {
        self.check_extent(other)?;
        let sum: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(sum / self.data.len() as f64)
    }

    /// Per-pixel `|self - other|`.
    pub fn abs_diff(&self, other: &Image2D) -> Result<Image2D> {
        self.check_extent(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .collect();
        Image2D::new(self.width, self.height, data)
    }

    pub fn max_abs_diff(&self, other: &Image2D) -> Result<f64> {
        self.check_extent(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Dense 2D motion field: horizontal (`u`) and vertical (`v`) components.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    pub u: Image2D,
    pub v: Image2D,
}

impl FlowField {
    pub fn new(u: Image2D, v: Image2D) -> Result<Self> {
        u.check_extent(&v)?;
        Ok(Self { u, v })
    }

    pub fn width(&self) -> usize {
        self.u.width()
    }

    pub fn height(&self) -> usize {
        self.u.height()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_construction() {
        assert!(Image2D::new(0, 3, vec![]).is_err());
        assert!(Image2D::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Image2D::new(2, 1, vec![0.0, f64::NAN]).is_err());
        assert!(Image2D::new(1, 1, vec![f64::INFINITY]).is_err());
        assert!(Image2D::new(2, 1, vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn transpose_round_trips() {
        let img = Image2D::from_fn(3, 2, |x, y| (x * 10 + y) as f64);
        let t = img.transpose();
        assert_eq!((t.width(), t.height()), (2, 3));
        assert_eq!(t.get(1, 2), img.get(2, 1));
        assert_eq!(t.transpose(), img);
    }

    #[test]
    fn crop_and_pad() {
        let img = Image2D::from_fn(4, 3, |x, y| (x + 4 * y) as f64);
        let c = img.crop(1, 1, 2, 2).unwrap();
        assert_eq!(c.data(), &[5.0, 6.0, 9.0, 10.0]);
        assert!(img.crop(3, 0, 2, 1).is_err());
        let p = img.pad_replicate(6, 4);
        assert_eq!(p.get(5, 3), img.get(3, 2));
        assert_eq!(p.get(0, 3), img.get(0, 2));
        assert_eq!(p.crop(0, 0, 4, 3).unwrap(), img);
    }
}
