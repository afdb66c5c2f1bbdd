//! Deterministic decimal fixed-point arithmetic.
//!
//! Every quantity in the engine is a [`FixedDecimal`]: an `i128` holding the
//! value scaled by `10^18` (the WAD convention). Arithmetic rounds half to
//! even at the 18th fractional digit and reports overflow instead of
//! wrapping. Transcendentals are evaluated at 30 digits internally and
//! rounded once, so results are reproducible bit-for-bit on any platform.

mod wide;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use ethnum::{I256, U256};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{AmmError, Result};
use wide::{div_round_half_even, Wide};

/// Number of fractional decimal digits carried by [`FixedDecimal`].
pub const DECIMALS: u32 = 18;

/// `10^DECIMALS`.
pub const SCALE: i128 = 1_000_000_000_000_000_000;

/// Signed decimal with 18 fractional digits.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FixedDecimal(i128);

#[allow(clippy::should_implement_trait)]
impl FixedDecimal {
    pub const ZERO: FixedDecimal = FixedDecimal(0);
    pub const ONE: FixedDecimal = FixedDecimal(SCALE);
    pub const TWO: FixedDecimal = FixedDecimal(2 * SCALE);
    /// Smallest positive step, `10^-18`.
    pub const ULP: FixedDecimal = FixedDecimal(1);
    pub const MAX: FixedDecimal = FixedDecimal(i128::MAX);
    pub const MIN: FixedDecimal = FixedDecimal(i128::MIN);
    pub const PI: FixedDecimal = FixedDecimal(3_141_592_653_589_793_238);
    pub const HALF_PI: FixedDecimal = FixedDecimal(1_570_796_326_794_896_619);

    pub const fn from_raw(raw: i128) -> Self {
        FixedDecimal(raw)
    }

    pub const fn raw(self) -> i128 {
        self.0
    }

    pub const fn from_int(v: i64) -> Self {
        FixedDecimal(v as i128 * SCALE)
    }

    /// `num / den` rounded half to even.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        FixedDecimal::from_int(num).div(FixedDecimal::from_int(den))
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// True when the value has no fractional part.
    pub fn is_integer(self) -> bool {
        self.0 % SCALE == 0
    }

    pub fn signum(self) -> i32 {
        match self.0.cmp(&0) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    pub fn abs(self) -> Result<Self> {
        self.0
            .checked_abs()
            .map(FixedDecimal)
            .ok_or(AmmError::Overflow("abs"))
    }

    pub fn neg(self) -> Result<Self> {
        self.0
            .checked_neg()
            .map(FixedDecimal)
            .ok_or(AmmError::Overflow("neg"))
    }

    pub fn add(self, rhs: Self) -> Result<Self> {
        self.0
            .checked_add(rhs.0)
            .map(FixedDecimal)
            .ok_or(AmmError::Overflow("add"))
    }

    pub fn sub(self, rhs: Self) -> Result<Self> {
        self.0
            .checked_sub(rhs.0)
            .map(FixedDecimal)
            .ok_or(AmmError::Overflow("sub"))
    }

    pub fn mul(self, rhs: Self) -> Result<Self> {
        let product = I256::new(self.0) * I256::new(rhs.0);
        narrow(div_round_half_even(product, I256::new(SCALE)), "mul")
    }

    pub fn div(self, rhs: Self) -> Result<Self> {
        if rhs.0 == 0 {
            return Err(AmmError::domain("division by zero"));
        }
        let num = I256::new(self.0) * I256::new(SCALE);
        narrow(div_round_half_even(num, I256::new(rhs.0)), "div")
    }

    pub fn mul_int(self, k: i64) -> Result<Self> {
        self.0
            .checked_mul(k as i128)
            .map(FixedDecimal)
            .ok_or(AmmError::Overflow("mul_int"))
    }

    pub fn div_int(self, k: i64) -> Result<Self> {
        if k == 0 {
            return Err(AmmError::domain("division by zero"));
        }
        narrow(
            div_round_half_even(I256::new(self.0), I256::new(k as i128)),
            "div_int",
        )
    }

    /// Square of the value.
    pub fn square(self) -> Result<Self> {
        self.mul(self)
    }

    /// Correctly rounded square root.
    pub fn sqrt(self) -> Result<Self> {
        if self.0 < 0 {
            return Err(AmmError::domain(format!("sqrt of negative value {self}")));
        }
        let n = U256::new(self.0 as u128) * U256::new(SCALE as u128);
        let r = wide::isqrt(n);
        let r = if n - r * r > r { r + U256::ONE } else { r };
        Ok(FixedDecimal(r.as_i128()))
    }

    /// Natural logarithm.
    pub fn ln(self) -> Result<Self> {
        if self.0 <= 0 {
            return Err(AmmError::domain(format!("ln of non-positive value {self}")));
        }
        to_fixed(wide::ln(Wide::from_fixed(self)), "ln")
    }

    pub fn exp(self) -> Result<Self> {
        exp_wide(Wide::from_fixed(self))
    }

    /// `self^exponent`. Integer exponents use repeated squaring; other
    /// exponents evaluate `exp(exponent · ln(self))` at working precision.
    pub fn pow(self, exponent: Self) -> Result<Self> {
        if exponent.is_integer() {
            let e = exponent.0 / SCALE;
            if self.is_zero() {
                return match e.cmp(&0) {
                    Ordering::Less => Err(AmmError::domain("zero to a negative power")),
                    Ordering::Equal => Ok(FixedDecimal::ONE),
                    Ordering::Greater => Ok(FixedDecimal::ZERO),
                };
            }
            if let Ok(e) = i32::try_from(e) {
                return self.powi(e);
            }
        }
        if self.0 < 0 {
            return Err(AmmError::domain(format!(
                "negative base {self} with fractional exponent {exponent}"
            )));
        }
        if self.is_zero() {
            return if exponent.is_positive() {
                Ok(FixedDecimal::ZERO)
            } else {
                Err(AmmError::domain("zero to a non-positive power"))
            };
        }
        let log = wide::ln(Wide::from_fixed(self));
        match log.checked_mul(Wide::from_fixed(exponent)) {
            Some(arg) => exp_wide(arg),
            None if log.is_negative() == exponent.is_negative() => Err(AmmError::Overflow("pow")),
            None => Ok(FixedDecimal::ZERO),
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, e: i32) -> Result<Self> {
        if e == 0 {
            return Ok(FixedDecimal::ONE);
        }
        if self.is_zero() {
            return if e < 0 {
                Err(AmmError::domain("zero to a negative power"))
            } else {
                Ok(FixedDecimal::ZERO)
            };
        }
        let mut n = e.unsigned_abs();
        let mut base = self;
        let mut acc = FixedDecimal::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(base)?;
            }
        }
        if e < 0 {
            FixedDecimal::ONE.div(acc)
        } else {
            Ok(acc)
        }
    }

    /// Sine of an angle in radians.
    pub fn sin(self) -> Result<Self> {
        let (s, _) = wide::sin_cos(Wide::from_fixed(self));
        to_fixed(s, "sin")
    }

    /// Cosine of an angle in radians.
    pub fn cos(self) -> Result<Self> {
        let (_, c) = wide::sin_cos(Wide::from_fixed(self));
        to_fixed(c, "cos")
    }

    /// Sine of an angle in degrees, reduced exactly before conversion.
    pub fn sin_deg(self) -> Result<Self> {
        to_fixed(sin_cos_deg(self).0, "sin_deg")
    }

    /// Cosine of an angle in degrees, reduced exactly before conversion.
    pub fn cos_deg(self) -> Result<Self> {
        to_fixed(sin_cos_deg(self).1, "cos_deg")
    }

    /// Arctangent of `self / x` in radians, quadrant-aware, in (-π, π].
    pub fn atan2(self, x: Self) -> Result<Self> {
        if self.is_zero() && x.is_zero() {
            return Err(AmmError::domain("atan2(0, 0) is undefined"));
        }
        to_fixed(wide::atan2(Wide::from_fixed(self), Wide::from_fixed(x)), "atan2")
    }

    /// Same as [`atan2`](Self::atan2) but in degrees.
    pub fn atan2_deg(self, x: Self) -> Result<Self> {
        if self.is_zero() && x.is_zero() {
            return Err(AmmError::domain("atan2(0, 0) is undefined"));
        }
        let rad = wide::atan2(Wide::from_fixed(self), Wide::from_fixed(x));
        to_fixed(rad.mul_int(180).div(Wide::PI), "atan2_deg")
    }

    pub fn to_radians(self) -> Result<Self> {
        to_fixed(Wide::from_fixed(self).mul(Wide::PI).div_int(180), "to_radians")
    }

    pub fn to_degrees(self) -> Result<Self> {
        to_fixed(Wide::from_fixed(self).mul_int(180).div(Wide::PI), "to_degrees")
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// |self − other| without overflow concerns for in-range operands.
    pub fn abs_diff(self, other: Self) -> Self {
        FixedDecimal(self.0.abs_diff(other.0).min(i128::MAX as u128) as i128)
    }
}

fn narrow(v: I256, op: &'static str) -> Result<FixedDecimal> {
    i128::try_from(v)
        .map(FixedDecimal)
        .map_err(|_| AmmError::Overflow(op))
}

fn to_fixed(v: Wide, op: &'static str) -> Result<FixedDecimal> {
    v.to_fixed().ok_or(AmmError::Overflow(op))
}

fn exp_wide(arg: Wide) -> Result<FixedDecimal> {
    // e^-44 < 10^-19: rounds to zero at 18 digits
    if arg < Wide::from_int(-44) {
        return Ok(FixedDecimal::ZERO);
    }
    if arg > Wide::from_int(48) {
        return Err(AmmError::Overflow("exp"));
    }
    let v = wide::exp(arg).ok_or(AmmError::Overflow("exp"))?;
    to_fixed(v, "exp")
}

fn sin_cos_deg(deg: FixedDecimal) -> (Wide, Wide) {
    // exact reduction modulo 360 keeps right angles exact
    let full = 360 * SCALE;
    let reduced = FixedDecimal(deg.0.rem_euclid(full));
    let rad = Wide::from_fixed(reduced).mul(Wide::PI).div_int(180);
    wide::sin_cos(rad)
}

// Spec-named free functions -------------------------------------------------

pub fn fp_add(a: FixedDecimal, b: FixedDecimal) -> Result<FixedDecimal> {
    a.add(b)
}

pub fn fp_sub(a: FixedDecimal, b: FixedDecimal) -> Result<FixedDecimal> {
    a.sub(b)
}

pub fn fp_mul(a: FixedDecimal, b: FixedDecimal) -> Result<FixedDecimal> {
    a.mul(b)
}

pub fn fp_div(a: FixedDecimal, b: FixedDecimal) -> Result<FixedDecimal> {
    a.div(b)
}

pub fn fp_sqrt(a: FixedDecimal) -> Result<FixedDecimal> {
    a.sqrt()
}

pub fn fp_pow(base: FixedDecimal, exponent: FixedDecimal) -> Result<FixedDecimal> {
    base.pow(exponent)
}

pub fn fp_ln(a: FixedDecimal) -> Result<FixedDecimal> {
    a.ln()
}

pub fn fp_exp(a: FixedDecimal) -> Result<FixedDecimal> {
    a.exp()
}

pub fn fp_sin(a: FixedDecimal) -> Result<FixedDecimal> {
    a.sin()
}

pub fn fp_cos(a: FixedDecimal) -> Result<FixedDecimal> {
    a.cos()
}

// Text form -------------------------------------------------------------------

impl fmt::Display for FixedDecimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int = abs / SCALE as u128;
        let frac = abs % SCALE as u128;
        if frac == 0 {
            write!(f, "{sign}{int}")
        } else {
            let digits = format!("{frac:018}");
            write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl fmt::Debug for FixedDecimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FixedDecimal({self})")
    }
}

impl FromStr for FixedDecimal {
    type Err = AmmError;

    /// Parses a plain decimal string. Digits beyond the 18th fractional
    /// place are rounded half to even.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || AmmError::validation(format!("invalid decimal '{s}'"));
        let t = s.trim();
        let (negative, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
        let kept = frac_part.len().min(DECIMALS as usize);
        digits.extend(frac_part.bytes().take(kept).map(|b| b - b'0'));
        digits.extend(std::iter::repeat_n(0, DECIMALS as usize - kept));

        let mut raw = U256::ZERO;
        for d in digits {
            raw = raw
                .checked_mul(U256::new(10))
                .and_then(|v| v.checked_add(U256::new(d as u128)))
                .ok_or(AmmError::Overflow("parse"))?;
        }
        let rest = &frac_part.as_bytes()[kept..];
        if let Some((&first, tail)) = rest.split_first() {
            let round_up = match first.cmp(&b'5') {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => {
                    tail.iter().any(|&b| b != b'0') || raw & U256::ONE == U256::ONE
                }
            };
            if round_up {
                raw += U256::ONE;
            }
        }
        if raw > U256::new(i128::MAX as u128) + U256::from(negative as u8) {
            return Err(AmmError::Overflow("parse"));
        }
        let v = if negative {
            (raw.as_i256()).wrapping_neg().as_i128()
        } else {
            raw.as_i128()
        };
        Ok(FixedDecimal(v))
    }
}

impl Serialize for FixedDecimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FixedDecimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand for literals in code and tests: panics on malformed input.
pub fn fd(s: &str) -> FixedDecimal {
    s.parse().unwrap_or_else(|e| panic!("bad literal {s}: {e}"))
}
