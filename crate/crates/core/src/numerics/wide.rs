//! 256-bit working precision used inside the transcendental kernels.
//!
//! Values carry 30 fractional digits, twelve more than [`FixedDecimal`], so a
//! kernel result rounded once at the end is correct to the last public digit
//! in all but pathological cases. Kernels assume reduced arguments; the public
//! wrappers in the parent module do range checks before calling in.

use ethnum::{I256, U256};

use super::FixedDecimal;

pub(crate) const WIDE_DECIMALS: u32 = 30;
const EXTRA_DECIMALS: u32 = WIDE_DECIMALS - super::DECIMALS;

const fn pow10(n: u32) -> i128 {
    let mut v = 1i128;
    let mut i = 0;
    while i < n {
        v *= 10;
        i += 1;
    }
    v
}

const WSCALE: I256 = I256::new(pow10(WIDE_DECIMALS));
const EXTRA: I256 = I256::new(pow10(EXTRA_DECIMALS));

/// Signed fixed-point number with 30 fractional digits in a 256-bit word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Wide(I256);

impl Wide {
    pub const ZERO: Wide = Wide(I256::ZERO);
    pub const ONE: Wide = Wide(WSCALE);
    pub const LN2: Wide = Wide(I256::new(693_147_180_559_945_309_417_232_121_458));
    pub const PI: Wide = Wide(I256::new(3_141_592_653_589_793_238_462_643_383_280));
    pub const HALF_PI: Wide = Wide(I256::new(1_570_796_326_794_896_619_231_321_691_640));
    pub const SQRT2: Wide = Wide(I256::new(1_414_213_562_373_095_048_801_688_724_210));
    pub const SQRT2_HALF: Wide = Wide(I256::new(707_106_781_186_547_524_400_844_362_105));

    pub fn from_int(v: i128) -> Wide {
        Wide(I256::new(v) * WSCALE)
    }

    pub fn from_fixed(v: FixedDecimal) -> Wide {
        Wide(I256::new(v.raw()) * EXTRA)
    }

    /// Rounds half-to-even back to 18 digits; `None` when out of range.
    pub fn to_fixed(self) -> Option<FixedDecimal> {
        let raw = div_round_half_even(self.0, EXTRA);
        i128::try_from(raw).ok().map(FixedDecimal::from_raw)
    }

    pub fn is_negative(self) -> bool {
        self.0.is_negative()
    }

    pub fn is_zero(self) -> bool {
        self.0 == I256::ZERO
    }

    pub fn abs(self) -> Wide {
        Wide(self.0.abs())
    }

    pub fn neg(self) -> Wide {
        Wide(-self.0)
    }

    pub fn add(self, o: Wide) -> Wide {
        Wide(self.0 + o.0)
    }

    pub fn sub(self, o: Wide) -> Wide {
        Wide(self.0 - o.0)
    }

    pub fn checked_mul(self, o: Wide) -> Option<Wide> {
        self.0
            .checked_mul(o.0)
            .map(|p| Wide(div_round_half_even(p, WSCALE)))
    }

    /// Product of two kernel-sized values (|a·b| well below 10^16).
    pub fn mul(self, o: Wide) -> Wide {
        self.checked_mul(o).expect("wide multiply out of kernel range")
    }

    pub fn mul_int(self, k: i128) -> Wide {
        Wide(self.0 * I256::new(k))
    }

    pub fn div(self, o: Wide) -> Wide {
        Wide(div_round_half_even(self.0 * WSCALE, o.0))
    }

    pub fn div_int(self, k: i128) -> Wide {
        Wide(div_round_half_even(self.0, I256::new(k)))
    }

    /// Nearest integer to `self / o`, ties to even.
    pub fn div_to_int(self, o: Wide) -> i128 {
        div_round_half_even(self.0, o.0).as_i128()
    }

    /// Multiplies by `2^k` (k may be negative; right shifts round half-to-even).
    pub fn scale_pow2(self, k: i32) -> Option<Wide> {
        if k >= 0 {
            let shifted = self.0.checked_shl(k as u32)?;
            if shifted >> (k as u32) != self.0 {
                return None;
            }
            Some(Wide(shifted))
        } else if k < -250 {
            Some(Wide::ZERO)
        } else {
            Some(Wide(div_round_half_even(self.0, I256::ONE << ((-k) as u32))))
        }
    }
}

/// Signed division rounding to the nearest integer, ties to even. `d` must be nonzero.
pub(crate) fn div_round_half_even(n: I256, d: I256) -> I256 {
    let negative = n.is_negative() != d.is_negative();
    let n_abs = n.unsigned_abs();
    let d_abs = d.unsigned_abs();
    let mut q = n_abs / d_abs;
    let r = n_abs % d_abs;
    let twice = r << 1;
    // r < d_abs ≤ 2^255, so the shift cannot overflow a U256
    if twice > d_abs || (twice == d_abs && q & U256::ONE == U256::ONE) {
        q += U256::ONE;
    }
    let q = q.as_i256();
    if negative {
        -q
    } else {
        q
    }
}

/// Integer square root, floor.
pub(crate) fn isqrt(n: U256) -> U256 {
    if n < U256::new(2) {
        return n;
    }
    let bits = 256 - n.leading_zeros();
    let mut x = U256::ONE << bits.div_ceil(2);
    loop {
        let y = (x + n / x) >> 1;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Natural logarithm for `x > 0`.
pub(crate) fn ln(x: Wide) -> Wide {
    debug_assert!(x > Wide::ZERO);
    // x = m · 2^k with m in [√2/2, √2)
    let bits = 256 - x.0.leading_zeros() as i32;
    let one_bits = 256 - WSCALE.leading_zeros() as i32;
    let mut k = bits - one_bits;
    let mut m = x.scale_pow2(-k).expect("ln reduction");
    while m >= Wide::SQRT2 {
        k += 1;
        m = x.scale_pow2(-k).expect("ln reduction");
    }
    while m < Wide::SQRT2_HALF {
        k -= 1;
        m = x.scale_pow2(-k).expect("ln reduction");
    }

    // ln m = 2 atanh(s), s = (m-1)/(m+1), |s| < 0.172
    let s = m.sub(Wide::ONE).div(m.add(Wide::ONE));
    let s2 = s.mul(s);
    let mut power = s;
    let mut sum = s;
    let mut denom = 1i128;
    loop {
        power = power.mul(s2);
        denom += 2;
        let term = power.div_int(denom);
        if term.is_zero() {
            break;
        }
        sum = sum.add(term);
    }
    sum.mul_int(2).add(Wide::LN2.mul_int(k as i128))
}

/// Exponential; `None` when the result does not fit the wide word.
pub(crate) fn exp(x: Wide) -> Option<Wide> {
    let k = x.div_to_int(Wide::LN2);
    if k > 150 {
        return None;
    }
    if k < -250 {
        return Some(Wide::ZERO);
    }
    let r = x.sub(Wide::LN2.mul_int(k));
    let mut term = Wide::ONE;
    let mut sum = Wide::ONE;
    let mut n = 0i128;
    loop {
        n += 1;
        term = term.mul(r).div_int(n);
        if term.is_zero() {
            break;
        }
        sum = sum.add(term);
    }
    sum.scale_pow2(k as i32)
}

/// Sine and cosine of a reduced argument |r| ≤ π/4.
fn sin_cos_reduced(r: Wide) -> (Wide, Wide) {
    let r2 = r.mul(r);
    let mut sin = r;
    let mut term = r;
    let mut n = 1i128;
    loop {
        term = term.mul(r2).div_int((n + 1) * (n + 2)).neg();
        n += 2;
        if term.is_zero() {
            break;
        }
        sin = sin.add(term);
    }
    let mut cos = Wide::ONE;
    let mut term = Wide::ONE;
    let mut n = 0i128;
    loop {
        term = term.mul(r2).div_int((n + 1) * (n + 2)).neg();
        n += 2;
        if term.is_zero() {
            break;
        }
        cos = cos.add(term);
    }
    (sin, cos)
}

/// `(sin x, cos x)` for x in radians.
pub(crate) fn sin_cos(x: Wide) -> (Wide, Wide) {
    let k = x.div_to_int(Wide::HALF_PI);
    let r = x.sub(Wide::HALF_PI.mul_int(k));
    let (s, c) = sin_cos_reduced(r);
    match k.rem_euclid(4) {
        0 => (s, c),
        1 => (c, s.neg()),
        2 => (s.neg(), c.neg()),
        _ => (c.neg(), s),
    }
}

pub(crate) fn sqrt(x: Wide) -> Wide {
    debug_assert!(!x.is_negative());
    let n = x.0.unsigned_abs() * WSCALE.unsigned_abs();
    let r = isqrt(n);
    let r = if n - r * r > r { r + U256::ONE } else { r };
    Wide(r.as_i256())
}

/// Arctangent in radians.
pub(crate) fn atan(x: Wide) -> Wide {
    if x.is_negative() {
        return atan(x.neg()).neg();
    }
    if x > Wide::ONE {
        return Wide::HALF_PI.sub(atan(Wide::ONE.div(x)));
    }
    // two half-angle reductions bring |x| under tan(π/16)
    let mut y = x;
    for _ in 0..2 {
        let root = sqrt(Wide::ONE.add(y.mul(y)));
        y = y.div(Wide::ONE.add(root));
    }
    let y2 = y.mul(y);
    let mut power = y;
    let mut sum = y;
    let mut denom = 1i128;
    let mut negative = false;
    loop {
        power = power.mul(y2);
        denom += 2;
        negative = !negative;
        let term = power.div_int(denom);
        if term.is_zero() {
            break;
        }
        sum = if negative { sum.sub(term) } else { sum.add(term) };
    }
    sum.mul_int(4)
}

/// Two-argument arctangent in (-π, π].
pub(crate) fn atan2(y: Wide, x: Wide) -> Wide {
    if x.is_zero() {
        return if y.is_negative() {
            Wide::HALF_PI.neg()
        } else if y.is_zero() {
            Wide::ZERO
        } else {
            Wide::HALF_PI
        };
    }
    // keep the quotient bounded by dividing the smaller magnitude by the larger
    let (ay, ax) = (y.abs(), x.abs());
    let base = if ay <= ax {
        atan(ay.div(ax))
    } else {
        Wide::HALF_PI.sub(atan(ax.div(ay)))
    };
    let angle = if x.is_negative() { Wide::PI.sub(base) } else { base };
    if y.is_negative() {
        angle.neg()
    } else {
        angle
    }
}
