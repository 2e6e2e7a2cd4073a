//! Parameterized binary floating-point formats emulated on top of `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundingMode {
    /// Round to nearest, ties to even.
    #[default]
    Nearest,
    /// Round toward zero.
    Truncate,
}

/// A sign / exponent / mantissa format with an IEEE-style centered bias.
///
/// The all-ones exponent code is reserved as in IEEE-754, so the largest
/// finite value is `(2 - 2^-m) * 2^bias`. There are no infinities or NaNs:
/// overflow saturates to the largest finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpFormat {
    pub exp_bits: u32,
    pub mant_bits: u32,
    /// Results below the smallest normal magnitude become zero.
    pub flush_denormals: bool,
    #[serde(default)]
    pub rounding: RoundingMode,
}

impl FpFormat {
    /// 24-bit format: 1 sign, 6 exponent, 17 mantissa bits.
    pub const FP24: FpFormat = FpFormat {
        exp_bits: 6,
        mant_bits: 17,
        flush_denormals: true,
        rounding: RoundingMode::Nearest,
    };

    /// Same grid as `f64`, including subnormals. Quantizing to it is the identity.
    pub const DOUBLE: FpFormat = FpFormat {
        exp_bits: 11,
        mant_bits: 52,
        flush_denormals: false,
        rounding: RoundingMode::Nearest,
    };

    pub const HALF: FpFormat = FpFormat {
        exp_bits: 5,
        mant_bits: 10,
        flush_denormals: true,
        rounding: RoundingMode::Nearest,
    };

    /// Flush-to-zero, round-to-nearest-even format.
    pub fn new(exp_bits: u32, mant_bits: u32) -> Result<Self> {
        let fmt = FpFormat {
            exp_bits,
            mant_bits,
            flush_denormals: true,
            rounding: RoundingMode::Nearest,
        };
        fmt.validate()?;
        Ok(fmt)
    }

    pub fn with_denormals(mut self, keep: bool) -> Self {
        self.flush_denormals = !keep;
        self
    }

    pub fn with_rounding(mut self, rounding: RoundingMode) -> Self {
        self.rounding = rounding;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=11).contains(&self.exp_bits) {
            return Err(Error::input(format!(
                "exponent width must be in 2..=11, got {}",
                self.exp_bits
            )));
        }
        if !(1..=52).contains(&self.mant_bits) {
            return Err(Error::input(format!(
                "mantissa width must be in 1..=52, got {}",
                self.mant_bits
            )));
        }
        Ok(())
    }

    pub fn total_bits(&self) -> u32 {
        1 + self.exp_bits + self.mant_bits
    }

    pub fn bias(&self) -> i32 {
        (1 << (self.exp_bits - 1)) - 1
    }

    pub fn min_exponent(&self) -> i32 {
        1 - self.bias()
    }

    pub fn max_exponent(&self) -> i32 {
        self.bias()
    }

    pub fn min_normal(&self) -> f64 {
        pow2(self.min_exponent())
    }

    pub fn max_finite(&self) -> f64 {
        (2.0 - pow2(-(self.mant_bits as i32))) * pow2(self.max_exponent())
    }

    /// Rounds `x` into this format.
    pub fn quantize(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::input("cannot quantize NaN"));
        }
        if x.is_infinite() {
            return Ok(self.max_finite().copysign(x));
        }
        Ok(self.round_parts(x, 0.0))
    }

    /// Rounds the exact value `hi + lo` into this format, where `hi` is the
    /// `f64` nearest to the exact value and `lo` the (signed) remainder.
    ///
    /// Only the sign of `lo` is inspected. It decides the cases where `hi`
    /// itself sits on a rounding boundary of this format, so the result is
    /// the single rounding of the exact value.
    pub(crate) fn round_parts(&self, hi: f64, lo: f64) -> f64 {
        if hi == 0.0 || hi.is_nan() {
            return hi;
        }
        let mag = hi.abs();
        let toward_zero = lo != 0.0 && (lo < 0.0) != (hi < 0.0);
        let away = lo != 0.0 && !toward_zero;
        let min_normal = self.min_normal();
        if self.flush_denormals && (mag < min_normal || (mag == min_normal && toward_zero)) {
            return 0.0_f64.copysign(hi);
        }
        let m = self.mant_bits as i32;
        let e = exponent_of(mag).max(self.min_exponent());
        let quantum = pow2(e - m);
        let scaled = mag / quantum;
        let floor = scaled.floor();
        let frac = scaled - floor;
        let units = match self.rounding {
            RoundingMode::Nearest => {
                if frac == 0.5 && lo != 0.0 {
                    if away {
                        floor + 1.0
                    } else {
                        floor
                    }
                } else {
                    scaled.round_ties_even()
                }
            }
            RoundingMode::Truncate => floor,
        };
        let mut out = units * quantum;
        if self.rounding == RoundingMode::Truncate && frac == 0.0 && toward_zero {
            out -= self.spacing_below(mag);
            if self.flush_denormals && out < min_normal {
                out = 0.0;
            }
        }
        out.min(self.max_finite()).copysign(hi)
    }

    /// Distance from representable magnitude `mag` to the next smaller representable magnitude.
    fn spacing_below(&self, mag: f64) -> f64 {
        let m = self.mant_bits as i32;
        let e = exponent_of(mag);
        let is_pow2 = mag == pow2(e);
        if is_pow2 && e > self.min_exponent() {
            pow2(e - 1 - m)
        } else {
            pow2(e.max(self.min_exponent()) - m)
        }
    }

    /// Whether `x` lies on this format's grid.
    pub fn is_representable(&self, x: f64) -> bool {
        x.is_finite() && self.round_parts(x, 0.0) == x
    }
}

impl std::fmt::Display for FpFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "FP{}({},{})",
            self.total_bits(),
            self.exp_bits,
            self.mant_bits
        )
    }
}

impl std::str::FromStr for FpFormat {
    type Err = Error;

    /// Parses `"e,m"`, e.g. `"6,17"`.
    fn from_str(s: &str) -> Result<Self> {
        let (e, m) = s
            .split_once(',')
            .ok_or_else(|| Error::input(format!("expected 'exp,mant', got '{s}'")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u32>()
                .map_err(|_| Error::input(format!("bad format width '{v}' in '{s}'")))
        };
        FpFormat::new(parse(e)?, parse(m)?)
    }
}

/// Exact `2^k` for `k` in the `f64` range (including subnormals).
pub(crate) fn pow2(k: i32) -> f64 {
    if k >= -1022 {
        assert!(k <= 1023, "2^{k} overflows f64");
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        assert!(k >= -1074, "2^{k} underflows f64");
        f64::from_bits(1u64 << (k + 1074))
    }
}

/// `floor(log2(x))` for finite positive `x`.
pub(crate) fn exponent_of(x: f64) -> i32 {
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased > 0 {
        biased - 1023
    } else {
        let frac = bits & ((1u64 << 52) - 1);
        (63 - frac.leading_zeros() as i32) - 1074
    }
}
