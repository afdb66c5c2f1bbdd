//! Binary depeg payoff from two adjacent one-tick positions.
//!
//! A long band sits just below the strike price (just above its angle) and a
//! short band of matching full-x notional sits right next to it on the
//! other side. Far above the strike both hold only y, far below both hold
//! only x and the x holdings cancel, so the combined value is flat on either
//! side and steps across the two bands.

use serde::{Deserialize, Serialize};

use crate::error::{AmmError, Result};
use crate::invariant::CurveParams;
use crate::numerics::FixedDecimal;
use crate::polar::{price_to_angle, NINETY};
use crate::ticks::{unit_reserves, LpPosition, Side, TickGrid, TickLedger};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HedgeSpec {
    pub strike_price: FixedDecimal,
    pub width_deg: FixedDecimal,
    pub notional_liquidity: FixedDecimal,
}

impl HedgeSpec {
    pub fn new(strike_price: FixedDecimal, notional_liquidity: FixedDecimal) -> Self {
        HedgeSpec {
            strike_price,
            width_deg: FixedDecimal::ONE,
            notional_liquidity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffCurve {
    pub samples: Vec<(FixedDecimal, FixedDecimal)>,
}

/// Token holdings of a band at a price, as `(x, y)`, ignoring the side.
pub fn position_holdings(
    params: &CurveParams,
    position: &LpPosition,
    price: FixedDecimal,
) -> Result<(FixedDecimal, FixedDecimal)> {
    if !price.is_positive() {
        return Err(AmmError::domain(format!("price must be positive, got {price}")));
    }
    let angle = price_to_angle(price)?;
    let (a, b) = (position.lower_deg(), position.upper_deg());
    // clamp the price angle into the band: outside it the position is one-sided
    let at = angle.max(a).min(b);
    let ua = unit_reserves(params, a)?;
    let ub = unit_reserves(params, b)?;
    let u = unit_reserves(params, at)?;
    let l = position.liquidity();
    let x = l.mul(u[0].sub(ua[0])?)?;
    let y = l.mul(u[1].sub(ub[1])?)?;
    Ok((x, y))
}

/// Mark-to-price value `p·x + y`; shorts count negatively.
pub fn position_value(params: &CurveParams, position: &LpPosition, price: FixedDecimal) -> Result<FixedDecimal> {
    let (x, y) = position_holdings(params, position, price)?;
    let v = price.mul(x)?.add(y)?;
    match position.side() {
        Side::Long => Ok(v),
        Side::Short => v.neg(),
    }
}

/// x held by a unit of liquidity once the price is below the whole band.
fn full_x(params: &CurveParams, lower: FixedDecimal, upper: FixedDecimal) -> Result<FixedDecimal> {
    unit_reserves(params, upper)?[0].sub(unit_reserves(params, lower)?[0])
}

/// y held by a band once the price is above all of it.
fn full_y(params: &CurveParams, position: &LpPosition) -> Result<FixedDecimal> {
    let lo = unit_reserves(params, position.lower_deg())?[1];
    let hi = unit_reserves(params, position.upper_deg())?[1];
    position.liquidity().mul(lo.sub(hi)?)
}

/// Long and short bands for a spec, with the given ids.
pub fn hedge_bands(
    params: &CurveParams,
    grid: &TickGrid,
    spec: &HedgeSpec,
    ids: (u64, u64),
) -> Result<(LpPosition, LpPosition)> {
    if !spec.width_deg.is_positive() {
        return Err(AmmError::validation(format!("hedge width must be positive, got {}", spec.width_deg)));
    }
    if spec.width_deg.raw() % grid.spacing_deg().raw() != 0 {
        return Err(AmmError::validation(format!(
            "hedge width {} is not a multiple of the {}° tick",
            spec.width_deg,
            grid.spacing_deg()
        )));
    }
    if !spec.strike_price.is_positive() {
        return Err(AmmError::validation(format!("strike must be positive, got {}", spec.strike_price)));
    }
    if !spec.notional_liquidity.is_positive() {
        return Err(AmmError::validation("notional liquidity must be positive"));
    }
    let strike = snap_to_grid(grid, price_to_angle(spec.strike_price)?);
    let lower = strike.sub(spec.width_deg)?;
    let upper = strike.add(spec.width_deg)?;
    if lower.is_negative() || upper > NINETY {
        return Err(AmmError::domain(format!(
            "hedge bands [{lower}, {upper}] leave the [0, 90] quadrant"
        )));
    }
    let long = LpPosition::new(ids.0, strike, upper, spec.notional_liquidity);
    // size the short so both bands end up holding the same x
    let ratio = full_x(params, strike, upper)?.div(full_x(params, lower, strike)?)?;
    let short = LpPosition::short(ids.1, lower, strike, spec.notional_liquidity.mul(ratio)?);
    Ok((long, short))
}

/// Nearest grid boundary to an angle.
fn snap_to_grid(grid: &TickGrid, angle: FixedDecimal) -> FixedDecimal {
    let s = grid.spacing_deg().raw();
    let k = (angle.raw() + s / 2).div_euclid(s);
    FixedDecimal::from_raw(k * s)
}

/// Builds the two bands and registers them in the ledger. The short borrows
/// existing liquidity, so the ledger must already hold enough in its band.
pub fn build_hedge(params: &CurveParams, ledger: &mut TickLedger, spec: &HedgeSpec) -> Result<(LpPosition, LpPosition)> {
    let id = ledger.next_id();
    let (long, short) = hedge_bands(params, ledger.grid(), spec, (id, id + 1))?;
    ledger.add_position(long.clone())?;
    if let Err(e) = ledger.add_position(short.clone()) {
        ledger.remove_position(long.id())?;
        return Err(e);
    }
    Ok((long, short))
}

/// Combined value normalised to 0 far above the strike and 1 far below.
pub fn hedge_payoff(params: &CurveParams, spec: &HedgeSpec, price_grid: &[FixedDecimal]) -> Result<PayoffCurve> {
    if price_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AmmError::validation("price grid must be strictly increasing"));
    }
    let grid = if spec.width_deg.is_integer() {
        TickGrid::default()
    } else {
        TickGrid::new(spec.width_deg)?
    };
    let (long, short) = hedge_bands(params, &grid, spec, (1, 2))?;
    let plateau = full_y(params, &long)?.sub(full_y(params, &short)?)?;
    if plateau.is_zero() {
        return Err(AmmError::Numeric("hedge plateaus coincide".into()));
    }
    let mut samples = Vec::with_capacity(price_grid.len());
    for &p in price_grid {
        let raw = position_value(params, &long, p)?.add(position_value(params, &short, p)?)?;
        samples.push((p, FixedDecimal::ONE.sub(raw.div(plateau)?)?));
    }
    Ok(PayoffCurve { samples })
}
