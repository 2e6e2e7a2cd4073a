//! Edge permeabilities derived from a guiding image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image2D;

/// Maps an absolute guide difference to a permeability in `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PermeabilityKind {
    /// `(1 + (|d| / sigma)^alpha)^-1`
    #[default]
    Rational,
    /// `exp(-|d| / sigma)`
    Exponential,
    /// Every edge blocks; the filter degenerates to the identity (for `lambda = 0`).
    Zero,
}

impl PermeabilityKind {
    pub fn evaluate(self, diff: f64, sigma: f64, alpha: f64) -> f64 {
        let d = diff.abs();
        match self {
            PermeabilityKind::Rational => 1.0 / (1.0 + (d / sigma).powf(alpha)),
            PermeabilityKind::Exponential => (-d / sigma).exp(),
            PermeabilityKind::Zero => 0.0,
        }
    }
}

impl std::str::FromStr for PermeabilityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(Self::Rational),
            "exp" | "exponential" => Ok(Self::Exponential),
            "zero" => Ok(Self::Zero),
            other => Err(Error::input(format!(
                "unknown permeability function '{other}' (expected rational, exp or zero)"
            ))),
        }
    }
}

/// Horizontal and vertical permeability maps of one image (or tile).
///
/// `pi_x[x, y]` couples `(x, y)` with `(x + 1, y)` and `pi_y[x, y]` couples
/// `(x, y)` with `(x, y + 1)`. The last column of `pi_x` and the last row of
/// `pi_y` are always zero, so no recursion reads across the border.
#[derive(Clone, Debug, PartialEq)]
pub struct PermeabilityPair {
    pi_x: Image2D,
    pi_y: Image2D,
}

impl PermeabilityPair {
    pub fn new(pi_x: Image2D, pi_y: Image2D) -> Result<Self> {
        pi_x.check_extent(&pi_y)?;
        if let Some(v) = pi_x
            .data()
            .iter()
            .chain(pi_y.data())
            .find(|v| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::input(format!("permeability {v} outside [0, 1]")));
        }
        let (w, h) = (pi_x.width(), pi_x.height());
        if (0..h).any(|y| pi_x.get(w - 1, y) != 0.0) {
            return Err(Error::input("pi_x must be zero in the last column"));
        }
        if (0..w).any(|x| pi_y.get(x, h - 1) != 0.0) {
            return Err(Error::input("pi_y must be zero in the last row"));
        }
        Ok(Self { pi_x, pi_y })
    }

    /// Builds a pair from unconstrained maps, clamping to `[0, 1]` and zeroing the borders.
    pub fn from_maps_clamped(mut pi_x: Image2D, mut pi_y: Image2D) -> Result<Self> {
        pi_x.check_extent(&pi_y)?;
        for v in pi_x.data_mut().iter_mut().chain(pi_y.data_mut()) {
            *v = v.clamp(0.0, 1.0);
        }
        zero_borders(&mut pi_x, &mut pi_y);
        Ok(Self { pi_x, pi_y })
    }

    /// All-zero permeabilities: every pixel is isolated.
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            pi_x: Image2D::zeros(width, height),
            pi_y: Image2D::zeros(width, height),
        }
    }

    pub fn pi_x(&self) -> &Image2D {
        &self.pi_x
    }

    pub fn pi_y(&self) -> &Image2D {
        &self.pi_y
    }

    pub fn width(&self) -> usize {
        self.pi_x.width()
    }

    pub fn height(&self) -> usize {
        self.pi_x.height()
    }

    /// The maps restricted to a window, with the window's own border entries zeroed.
    pub fn restrict(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Self> {
        let mut pi_x = self.pi_x.crop(x0, y0, width, height)?;
        let mut pi_y = self.pi_y.crop(x0, y0, width, height)?;
        zero_borders(&mut pi_x, &mut pi_y);
        Ok(Self { pi_x, pi_y })
    }

    pub fn transpose(&self) -> Self {
        Self {
            pi_x: self.pi_y.transpose(),
            pi_y: self.pi_x.transpose(),
        }
    }

    pub fn into_maps(self) -> (Image2D, Image2D) {
        (self.pi_x, self.pi_y)
    }
}

fn zero_borders(pi_x: &mut Image2D, pi_y: &mut Image2D) {
    let (w, h) = (pi_x.width(), pi_x.height());
    for y in 0..h {
        pi_x.set(w - 1, y, 0.0);
    }
    for x in 0..w {
        pi_y.set(x, h - 1, 0.0);
    }
}

/// Extracts pairwise permeabilities from `guide` with the given function.
pub fn compute_permeabilities_with(
    guide: &Image2D,
    kind: PermeabilityKind,
    sigma: f64,
    alpha: f64,
) -> Result<PermeabilityPair> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::input(format!("sigma must be positive, got {sigma}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::input(format!("alpha must be positive, got {alpha}")));
    }
    if guide.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::input("guide contains non-finite samples"));
    }
    let (w, h) = (guide.width(), guide.height());
    let pi_x = Image2D::from_fn(w, h, |x, y| {
        if x + 1 < w {
            kind.evaluate(guide.get(x + 1, y) - guide.get(x, y), sigma, alpha)
        } else {
            0.0
        }
    });
    let pi_y = Image2D::from_fn(w, h, |x, y| {
        if y + 1 < h {
            kind.evaluate(guide.get(x, y + 1) - guide.get(x, y), sigma, alpha)
        } else {
            0.0
        }
    });
    Ok(PermeabilityPair { pi_x, pi_y })
}

/// Rational permeabilities `(1 + (|dI| / sigma)^alpha)^-1`.
pub fn compute_permeabilities(guide: &Image2D, sigma: f64, alpha: f64) -> Result<PermeabilityPair> {
    compute_permeabilities_with(guide, PermeabilityKind::Rational, sigma, alpha)
}
