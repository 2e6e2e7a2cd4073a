//! The scanline permeability filter in exact arithmetic.
//!
//! One 1D filter pass over a line of `n` samples runs a forward and a backward
//! recursion, each carrying a data accumulator (`F`, `B`) and a normalization
//! accumulator (`F^`, `B^`), and combines them per sample:
//!
//! ```text
//! F[p]  = pi[p-1] * (F[p-1]  + J[p-1])     F[0] = F^[0] = 0
//! F^[p] = pi[p-1] * (F^[p-1] + 1)
//! B[p]  = pi[p]   * (B[p+1]  + J[p+1])     B[n-1] = B^[n-1] = 0
//! B^[p] = pi[p]   * (B^[p+1] + 1)
//! J'[p] = (F[p] + J[p] + B[p] + lambda * (A[p] - J[p])) / (F^[p] + 1 + B^[p])
//! ```
//!
//! All arithmetic goes through [`Arithmetic`] so the same control flow can be
//! replayed under a reduced-precision number format. The double-precision
//! reference ([`Compensated`]) carries the accumulators as double-double
//! values and rounds each output sample once, so a pass returns a constant
//! line exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::image::Image2D;
use crate::permeability::{compute_permeabilities_with, PermeabilityKind, PermeabilityPair};

/// Largest line length [`pf_oracle_row`] accepts by default.
pub const DEFAULT_ORACLE_LIMIT: usize = 512;

/// The four operations of the recursion datapath plus input quantization.
pub trait Arithmetic: Sync {
    fn ingest(&self, x: f64) -> f64;
    fn add(&self, a: f64, b: f64) -> f64;
    fn sub(&self, a: f64, b: f64) -> f64;
    fn mul(&self, a: f64, b: f64) -> f64;
    /// Only called with denominators `>= 1`.
    fn div(&self, a: f64, b: f64) -> f64;
}

/// Plain `f64` arithmetic, one rounding per operation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Native;

impl Arithmetic for Native {
    #[inline(always)]
    fn ingest(&self, x: f64) -> f64 {
        x
    }
    #[inline(always)]
    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }
    #[inline(always)]
    fn sub(&self, a: f64, b: f64) -> f64 {
        a - b
    }
    #[inline(always)]
    fn mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }
    #[inline(always)]
    fn div(&self, a: f64, b: f64) -> f64 {
        a / b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// Edge sensitivity scale of the permeability function.
    pub sigma: f64,
    /// Sharpness exponent of the rational permeability function.
    pub alpha: f64,
    /// Bias toward the original data channel, in `[0, 1]`.
    pub lambda: f64,
    /// Number of XY-passes.
    pub iterations: usize,
    pub permeability: PermeabilityKind,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            alpha: 2.0,
            lambda: 0.0,
            iterations: 4,
            permeability: PermeabilityKind::Rational,
        }
    }
}

impl FilterParams {
    pub fn new(sigma: f64, alpha: f64, lambda: f64, iterations: usize) -> Result<Self> {
        let params = Self {
            sigma,
            alpha,
            lambda,
            iterations,
            permeability: PermeabilityKind::Rational,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_permeability(mut self, kind: PermeabilityKind) -> Self {
        self.permeability = kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::input(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::input(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::input(format!(
                "lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        if self.iterations == 0 {
            return Err(Error::input("iterations must be at least 1"));
        }
        Ok(())
    }

    pub fn permeabilities(&self, guide: &Image2D) -> Result<PermeabilityPair> {
        compute_permeabilities_with(guide, self.permeability, self.sigma, self.alpha)
    }
}

/// Forward recursion into caller-provided buffers.
pub fn forward_recursion_into<A: Arithmetic + ?Sized>(
    arith: &A,
    j: &[f64],
    pi: &[f64],
    f: &mut [f64],
    f_hat: &mut [f64],
) {
    let n = j.len();
    debug_assert!(pi.len() + 1 >= n && f.len() == n && f_hat.len() == n);
    if n == 0 {
        return;
    }
    f[0] = 0.0;
    f_hat[0] = 0.0;
    for p in 1..n {
        f[p] = arith.mul(pi[p - 1], arith.add(f[p - 1], j[p - 1]));
        f_hat[p] = arith.mul(pi[p - 1], arith.add(f_hat[p - 1], 1.0));
    }
}

/// Backward recursion into caller-provided buffers.
pub fn backward_recursion_into<A: Arithmetic + ?Sized>(
    arith: &A,
    j: &[f64],
    pi: &[f64],
    b: &mut [f64],
    b_hat: &mut [f64],
) {
    let n = j.len();
    debug_assert!(pi.len() + 1 >= n && b.len() == n && b_hat.len() == n);
    if n == 0 {
        return;
    }
    b[n - 1] = 0.0;
    b_hat[n - 1] = 0.0;
    for p in (1..n).rev() {
        b[p - 1] = arith.mul(pi[p - 1], arith.add(b[p], j[p]));
        b_hat[p - 1] = arith.mul(pi[p - 1], arith.add(b_hat[p], 1.0));
    }
}

/// Combines both recursions into the filtered line.
#[allow(clippy::too_many_arguments)]
pub fn combine_into<A: Arithmetic + ?Sized>(
    arith: &A,
    f: &[f64],
    f_hat: &[f64],
    b: &[f64],
    b_hat: &[f64],
    j: &[f64],
    a: &[f64],
    lambda: f64,
    out: &mut [f64],
) {
    for p in 0..j.len() {
        let bias = arith.mul(lambda, arith.sub(a[p], j[p]));
        let num = arith.add(arith.add(arith.add(f[p], j[p]), b[p]), bias);
        let den = arith.add(arith.add(f_hat[p], 1.0), b_hat[p]);
        out[p] = arith.div(num, den);
    }
}

fn check_line(j: &[f64], pi: &[f64]) {
    assert!(!j.is_empty(), "scanline must hold at least one sample");
    assert_eq!(
        pi.len() + 1,
        j.len(),
        "a line of n samples has n - 1 permeabilities"
    );
}

/// `(F, F^)` for one line; `pi` holds the `n - 1` permeabilities between neighbours.
pub fn forward_recursion(j: &[f64], pi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    check_line(j, pi);
    let mut f = vec![0.0; j.len()];
    let mut f_hat = vec![0.0; j.len()];
    forward_recursion_into(&Native, j, pi, &mut f, &mut f_hat);
    (f, f_hat)
}

/// `(B, B^)` for one line.
pub fn backward_recursion(j: &[f64], pi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    check_line(j, pi);
    let mut b = vec![0.0; j.len()];
    let mut b_hat = vec![0.0; j.len()];
    backward_recursion_into(&Native, j, pi, &mut b, &mut b_hat);
    (b, b_hat)
}

pub fn combine(
    f: &[f64],
    f_hat: &[f64],
    b: &[f64],
    b_hat: &[f64],
    j: &[f64],
    a: &[f64],
    lambda: f64,
) -> Vec<f64> {
    let n = j.len();
    assert!(
        [f.len(), f_hat.len(), b.len(), b_hat.len(), a.len()]
            .iter()
            .all(|&len| len == n),
        "combine inputs must share one length"
    );
    let mut out = vec![0.0; n];
    combine_into(&Native, f, f_hat, b, b_hat, j, a, lambda, &mut out);
    out
}

/// One complete 1D filter step on a line, in the reference arithmetic.
pub fn filter_line(pi: &[f64], j: &[f64], a: &[f64], lambda: f64) -> Vec<f64> {
    check_line(j, pi);
    assert_eq!(a.len(), j.len());
    let mut scratch = LineScratch::new(j.len());
    let mut out = vec![0.0; j.len()];
    Compensated.filter(&mut scratch, pi, j, a, lambda, &mut out);
    out
}

pub(crate) struct LineScratch {
    f: Vec<Dd>,
    f_hat: Vec<Dd>,
    b: Vec<Dd>,
    b_hat: Vec<Dd>,
    plain: [Vec<f64>; 4],
}

impl LineScratch {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            f: vec![Dd::ZERO; n],
            f_hat: vec![Dd::ZERO; n],
            b: vec![Dd::ZERO; n],
            b_hat: vec![Dd::ZERO; n],
            plain: std::array::from_fn(|_| vec![0.0; n]),
        }
    }
}

/// A complete line filter: recursions plus combine.
pub(crate) trait LineKernel: Sync {
    fn ingest(&self, x: f64) -> f64;
    fn filter(
        &self,
        scratch: &mut LineScratch,
        pi: &[f64],
        j: &[f64],
        a: &[f64],
        lambda: f64,
        out: &mut [f64],
    );
}

impl<A: Arithmetic + ?Sized> LineKernel for A {
    fn ingest(&self, x: f64) -> f64 {
        Arithmetic::ingest(self, x)
    }

    fn filter(
        &self,
        scratch: &mut LineScratch,
        pi: &[f64],
        j: &[f64],
        a: &[f64],
        lambda: f64,
        out: &mut [f64],
    ) {
        let [f, f_hat, b, b_hat] = &mut scratch.plain;
        forward_recursion_into(self, j, pi, f, f_hat);
        backward_recursion_into(self, j, pi, b, b_hat);
        combine_into(self, f, f_hat, b, b_hat, j, a, lambda, out);
    }
}

/// Double-precision reference: accumulators in double-double, each output
/// sample rounded once to `f64`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compensated;

impl LineKernel for Compensated {
    fn ingest(&self, x: f64) -> f64 {
        x
    }

    fn filter(
        &self,
        s: &mut LineScratch,
        pi: &[f64],
        j: &[f64],
        a: &[f64],
        lambda: f64,
        out: &mut [f64],
    ) {
        let n = j.len();
        s.f[0] = Dd::ZERO;
        s.f_hat[0] = Dd::ZERO;
        for p in 1..n {
            s.f[p] = s.f[p - 1].add_f64(j[p - 1]).mul_f64(pi[p - 1]);
            s.f_hat[p] = s.f_hat[p - 1].add_f64(1.0).mul_f64(pi[p - 1]);
        }
        s.b[n - 1] = Dd::ZERO;
        s.b_hat[n - 1] = Dd::ZERO;
        for p in (1..n).rev() {
            s.b[p - 1] = s.b[p].add_f64(j[p]).mul_f64(pi[p - 1]);
            s.b_hat[p - 1] = s.b_hat[p].add_f64(1.0).mul_f64(pi[p - 1]);
        }
        for p in 0..n {
            let bias = Dd::from_f64(a[p]).add_f64(-j[p]).mul_f64(lambda);
            let num = s.f[p].add_f64(j[p]).add(s.b[p]).add(bias);
            let den = s.f_hat[p].add_f64(1.0).add(s.b_hat[p]);
            out[p] = num.div_to_f64(den);
        }
    }
}

/// Filters every row of `j` independently. `pi_x` supplies the row permeabilities.
pub(crate) fn pass_rows<K: LineKernel + ?Sized>(
    kernel: &K,
    j: &Image2D,
    a: &Image2D,
    pi_x: &Image2D,
    lambda: f64,
) -> Image2D {
    let w = j.width();
    let mut out = Image2D::zeros(w, j.height());
    out.data_mut()
        .par_chunks_mut(w)
        .zip(j.data().par_chunks(w))
        .zip(a.data().par_chunks(w).zip(pi_x.data().par_chunks(w)))
        .for_each_init(
            || LineScratch::new(w),
            |scratch, ((out_row, j_row), (a_row, pi_row))| {
                kernel.filter(scratch, &pi_row[..w - 1], j_row, a_row, lambda, out_row);
            },
        );
    out
}

fn check_pass_inputs(j: &Image2D, a: &Image2D, pi: &Image2D) -> Result<()> {
    j.check_extent(a)?;
    j.check_extent(pi)
}

/// Horizontal pass: filters every row with `pi_x`.
pub fn pass_x(j: &Image2D, a: &Image2D, pi_x: &Image2D, lambda: f64) -> Result<Image2D> {
    check_pass_inputs(j, a, pi_x)?;
    Ok(pass_rows(&Compensated, j, a, pi_x, lambda))
}

/// Vertical pass: filters every column with `pi_y`, via transposition.
pub fn pass_y(j: &Image2D, a: &Image2D, pi_y: &Image2D, lambda: f64) -> Result<Image2D> {
    check_pass_inputs(j, a, pi_y)?;
    Ok(pass_rows(
        &Compensated,
        &j.transpose(),
        &a.transpose(),
        &pi_y.transpose(),
        lambda,
    )
    .transpose())
}

/// Runs `iterations` XY-passes starting from `J = A` under `kernel`.
///
/// `a`, the permeabilities and `lambda` are ingested first.
pub(crate) fn pf_iterate<K: LineKernel + ?Sized>(
    kernel: &K,
    pi: &PermeabilityPair,
    a: &Image2D,
    lambda: f64,
    iterations: usize,
) -> Image2D {
    let a = a.map(|v| kernel.ingest(v));
    let pi_x = pi.pi_x().map(|v| kernel.ingest(v));
    let pi_y_t = pi.pi_y().transpose().map(|v| kernel.ingest(v));
    let lambda = kernel.ingest(lambda);
    let a_t = a.transpose();
    let mut j = a.clone();
    for _ in 0..iterations {
        j = pass_rows(kernel, &j, &a, &pi_x, lambda);
        j = pass_rows(kernel, &j.transpose(), &a_t, &pi_y_t, lambda).transpose();
    }
    j
}

/// The global (whole-frame) permeability filter on precomputed permeabilities.
///
/// `params.iterations == 0` returns `a` unchanged.
pub fn pf_global(pi: &PermeabilityPair, a: &Image2D, params: &FilterParams) -> Result<Image2D> {
    a.check_extent(pi.pi_x())?;
    if !(0.0..=1.0).contains(&params.lambda) {
        return Err(Error::input(format!(
            "lambda must lie in [0, 1], got {}",
            params.lambda
        )));
    }
    Ok(pf_iterate(
        &Compensated,
        pi,
        a,
        params.lambda,
        params.iterations,
    ))
}

/// Extracts permeabilities from `guide` and runs [`pf_global`].
pub fn pf_global_guided(guide: &Image2D, a: &Image2D, params: &FilterParams) -> Result<Image2D> {
    guide.check_extent(a)?;
    let pi = params.permeabilities(guide)?;
    pf_global(&pi, a, params)
}

/// Dense filter weights `H[p][q]` of one line, built directly from the
/// products of permeabilities between `p` and `q`.
pub fn oracle_matrix(pi: &[f64]) -> Vec<Vec<f64>> {
    let n = pi.len() + 1;
    let mut h = vec![vec![0.0; n]; n];
    for (p, row) in h.iter_mut().enumerate() {
        row[p] = 1.0;
        let mut w = 1.0;
        for q in (p + 1)..n {
            w *= pi[q - 1];
            row[q] = w;
        }
        let mut w = 1.0;
        for q in (0..p).rev() {
            w *= pi[q];
            row[q] = w;
        }
        let z: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= z;
        }
    }
    h
}

/// Dense O(n^2) evaluation of one filter step, for cross-checking the recursions.
pub fn pf_oracle_row(pi: &[f64], j: &[f64], a: &[f64], lambda: f64) -> Result<Vec<f64>> {
    pf_oracle_row_with_limit(pi, j, a, lambda, DEFAULT_ORACLE_LIMIT)
}

pub fn pf_oracle_row_with_limit(
    pi: &[f64],
    j: &[f64],
    a: &[f64],
    lambda: f64,
    limit: usize,
) -> Result<Vec<f64>> {
    let n = j.len();
    if n > limit {
        return Err(Error::input(format!(
            "oracle refuses lines longer than {limit} samples (got {n})"
        )));
    }
    if n == 0 || pi.len() + 1 != n || a.len() != n {
        return Err(Error::input(
            "oracle needs n samples, n values of A and n - 1 permeabilities",
        ));
    }
    let h = oracle_matrix(pi);
    Ok(h.iter()
        .enumerate()
        .map(|(p, row)| {
            let smoothed: f64 = row.iter().zip(j).map(|(hq, jq)| hq * jq).sum();
            smoothed + lambda * row[p] * (a[p] - j[p])
        })
        .collect())
}
