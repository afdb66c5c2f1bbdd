//! Polar view of the two-token circle.
//!
//! Points on the CCMM arc are described by their angle and distance from the
//! circle centre `(l·s, l·s)`. The angle is measured so that the symmetric
//! point sits at 45°, the all-x endpoint `(l·s, 0)` at 90° (price 0) and the
//! all-y endpoint `(0, l·s)` at 0° (unbounded price); the marginal price of x
//! in y is `cot φ`. Tick angles use the separate price map
//! [`price_to_angle`], which agrees with the geometric angle at 0°, 45° and 90°.

use serde::{Deserialize, Serialize};

use crate::error::{AmmError, Result};
use crate::invariant::{CurveMode, CurveParams, PoolState};
use crate::numerics::FixedDecimal;
use crate::swap_cartesian::{check_pair, spot_price, SwapQuote};

pub(crate) const NINETY: FixedDecimal = FixedDecimal::from_raw(90_000_000_000_000_000_000);

/// Radius deviation tolerated before a point counts as off-curve.
const RADIUS_TOLERANCE: FixedDecimal = FixedDecimal::from_raw(1_000_000_000);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub angle_deg: FixedDecimal,
    pub radius: FixedDecimal,
}

/// Tick angle for a price: `φ = 90 / (p + 1)`.
pub fn price_to_angle(price: FixedDecimal) -> Result<FixedDecimal> {
    if price.is_negative() {
        return Err(AmmError::domain(format!("price must be non-negative, got {price}")));
    }
    NINETY.div(price.add(FixedDecimal::ONE)?)
}

/// Inverse of [`price_to_angle`]: `p = 90/φ − 1`.
pub fn angle_to_price(angle_deg: FixedDecimal) -> Result<FixedDecimal> {
    if !angle_deg.is_positive() || angle_deg > NINETY {
        return Err(AmmError::domain(format!(
            "angle must lie in (0, 90], got {angle_deg}"
        )));
    }
    NINETY.div(angle_deg)?.sub(FixedDecimal::ONE)
}

fn require_circle(params: &CurveParams) -> Result<()> {
    if params.mode != CurveMode::Ccmm || params.n != 2 {
        return Err(AmmError::validation("polar coordinates are defined for two-token CCMM pools"));
    }
    Ok(())
}

/// Polar coordinates of an on-curve point.
pub fn cartesian_to_polar(
    params: &CurveParams,
    x: FixedDecimal,
    y: FixedDecimal,
    scale: FixedDecimal,
) -> Result<PolarPoint> {
    require_circle(params)?;
    let r = params.radius(scale)?;
    let (dx, dy) = (r.sub(x)?, r.sub(y)?);
    if dx.is_negative() || dy.is_negative() {
        return Err(AmmError::domain(format!("({x}, {y}) is not on the trading arc")));
    }
    let radius = dx.square()?.add(dy.square()?)?.sqrt()?;
    if radius.abs_diff(r) > RADIUS_TOLERANCE {
        return Err(AmmError::domain(format!(
            "({x}, {y}) is off-curve: radius {radius}, expected {r}"
        )));
    }
    Ok(PolarPoint {
        angle_deg: dy.atan2_deg(dx)?,
        radius,
    })
}

pub fn polar_to_cartesian(params: &CurveParams, point: PolarPoint, scale: FixedDecimal) -> Result<(FixedDecimal, FixedDecimal)> {
    require_circle(params)?;
    if point.angle_deg.is_negative() || point.angle_deg > NINETY {
        return Err(AmmError::domain(format!("angle {} outside [0, 90]", point.angle_deg)));
    }
    let r = params.radius(scale)?;
    let x = r.sub(point.radius.mul(point.angle_deg.cos_deg()?)?)?;
    let y = r.sub(point.radius.mul(point.angle_deg.sin_deg()?)?)?;
    Ok((x, y))
}

/// Marginal price of x in y at a polar point.
pub fn polar_price(point: PolarPoint) -> Result<FixedDecimal> {
    let s = point.angle_deg.sin_deg()?;
    if s.is_zero() {
        return Err(AmmError::domain("price is unbounded at 0°"));
    }
    point.angle_deg.cos_deg()?.div(s)
}

/// Output of the reference polar routine: the amount of y paid for `x_in`
/// when the circle is blown up by a factor of 10⁴ and the trade is read off
/// the 135° direction.
pub fn polar_swap_delta_y(params: &CurveParams, x_in: FixedDecimal) -> Result<FixedDecimal> {
    rotated_delta_y(params.l.mul_int(10_000)?, x_in)
}

/// The same routine on the unscaled circle, where it equals the output of
/// selling `x_in` from the symmetric point `(1, 1)`.
pub fn polar_swap_delta_y_clean(params: &CurveParams, x_in: FixedDecimal) -> Result<FixedDecimal> {
    rotated_delta_y(params.l, x_in)
}

fn rotated_delta_y(l: FixedDecimal, x_in: FixedDecimal) -> Result<FixedDecimal> {
    let angle = FixedDecimal::from_int(135);
    let (sin, cos) = (angle.sin_deg()?, angle.cos_deg()?);
    let t = l.mul(sin)?.sub(x_in)?.div(l)?;
    let radicand = FixedDecimal::ONE.sub(t.square()?)?;
    if radicand.is_negative() {
        return Err(AmmError::infeasible(format!("x_in = {x_in} leaves the circle")));
    }
    l.mul(radicand.sqrt()?)?.add(l.mul(cos)?)
}

/// Swap on a two-token CCMM pool computed by rotating the state point about
/// the centre. `exact_out` selects whether `amount` is the input or output.
pub fn polar_swap(
    params: &CurveParams,
    state: &PoolState,
    token_in: usize,
    token_out: usize,
    amount: FixedDecimal,
    exact_out: bool,
) -> Result<SwapQuote> {
    require_circle(params)?;
    check_pair(params, token_in, token_out)?;
    state.validate(params)?;
    if amount.is_negative() {
        return Err(AmmError::validation(format!("trade amount must be non-negative, got {amount}")));
    }
    let scale = state.liquidity_scale;
    let price_before = spot_price(params, state, token_in, token_out)?;
    if amount.is_zero() {
        return Ok(SwapQuote::zero(state, token_in, token_out, price_before));
    }
    let start = cartesian_to_polar(params, state.reserves[0], state.reserves[1], scale)?;
    let r = params.radius(scale)?;

    // the coordinate fixed by the trade, and which axis it lives on
    let (fixed_token, fixed_value) = if exact_out {
        (token_out, state.reserves[token_out].sub(amount)?)
    } else {
        (token_in, state.reserves[token_in].add(amount)?)
    };
    if fixed_value.is_negative() || fixed_value > r {
        return Err(AmmError::infeasible("trade leaves the arc"));
    }
    let along = r.sub(fixed_value)?;
    let across2 = start.radius.square()?.sub(along.square()?)?;
    if across2.is_negative() {
        return Err(AmmError::infeasible("trade leaves the arc"));
    }
    let across = across2.sqrt()?;
    // rotate: the angle whose projection on the fixed axis is `along`
    let angle_deg = if fixed_token == 0 {
        across.atan2_deg(along)?
    } else {
        along.atan2_deg(across)?
    };
    let end = PolarPoint {
        angle_deg,
        radius: start.radius,
    };
    let (x, y) = polar_to_cartesian(params, end, scale)?;
    let mut reserves = vec![x, y];
    // keep the pinned coordinate exactly as traded
    reserves[fixed_token] = fixed_value;
    let (amount_in, amount_out) = if exact_out {
        (reserves[token_in].sub(state.reserves[token_in])?, amount)
    } else {
        (amount, state.reserves[token_out].sub(reserves[token_out])?)
    };
    if amount_in.is_negative() || amount_out.is_negative() || reserves.iter().any(|v| v.is_negative()) {
        return Err(AmmError::infeasible("trade leaves the arc"));
    }
    let after = PoolState::new(reserves, scale);
    let price_after = spot_price(params, &after, token_in, token_out).unwrap_or(FixedDecimal::MAX);
    Ok(SwapQuote {
        token_in,
        token_out,
        amount_in,
        amount_out,
        price_before,
        price_after,
        new_reserves: after.reserves,
        liquidity_scale: scale,
    })
}
