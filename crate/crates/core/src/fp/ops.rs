//! Single-rounding arithmetic in an [`FpFormat`].
//!
//! Each operation computes the `f64` result together with its exact error
//! term (error-free transformations), then rounds the exact value once.

use crate::dd::{two_prod, two_sum};
use crate::error::{Error, Result};
use crate::fp::format::FpFormat;
use crate::scanline::Arithmetic;

/// Quotient plus a value carrying the sign of the exact remainder.
#[inline]
fn div_rem(a: f64, b: f64) -> (f64, f64) {
    let q = a / b;
    let r = (-q).mul_add(b, a);
    (
        q,
        if r == 0.0 {
            0.0
        } else {
            r.signum() * b.signum()
        },
    )
}

#[inline]
pub fn q_add(a: f64, b: f64, fmt: &FpFormat) -> f64 {
    let (s, e) = two_sum(a, b);
    fmt.round_parts(s, e)
}

#[inline]
pub fn q_sub(a: f64, b: f64, fmt: &FpFormat) -> f64 {
    q_add(a, -b, fmt)
}

#[inline]
pub fn q_mul(a: f64, b: f64, fmt: &FpFormat) -> f64 {
    let (p, e) = two_prod(a, b);
    fmt.round_parts(p, e)
}

pub fn q_div(a: f64, b: f64, fmt: &FpFormat) -> Result<f64> {
    if b == 0.0 {
        return Err(Error::input("division by zero"));
    }
    let (q, r) = div_rem(a, b);
    Ok(fmt.round_parts(q, r))
}

impl Arithmetic for FpFormat {
    #[inline]
    fn ingest(&self, x: f64) -> f64 {
        self.round_parts(x, 0.0)
    }
    #[inline]
    fn add(&self, a: f64, b: f64) -> f64 {
        q_add(a, b, self)
    }
    #[inline]
    fn sub(&self, a: f64, b: f64) -> f64 {
        q_sub(a, b, self)
    }
    #[inline]
    fn mul(&self, a: f64, b: f64) -> f64 {
        q_mul(a, b, self)
    }
    #[inline]
    fn div(&self, a: f64, b: f64) -> f64 {
        let (q, r) = div_rem(a, b);
        self.round_parts(q, r)
    }
}
