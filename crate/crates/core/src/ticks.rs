//! Angle ticks, range positions and swaps that cross them.
//!
//! The price axis is cut into ticks of equal width in the angle
//! `φ = 90/(p + 1)`. A position supplies liquidity `L` on a tick-aligned
//! band `[lower, upper)`; the active liquidity at an angle is the sum over
//! the bands containing it. Inside a band the pool trades on the two-token
//! circle scaled by the active sum, so the virtual reserves at price `p` are
//! `L · unit(p)` with
//!
//! ```text
//! unit(p) = ( l (1 − p/√(1+p²)),  l (1 − 1/√(1+p²)) )
//! ```
//!
//! When a trade reaches a band edge the price is kept and the reserves are
//! re-anchored to the liquidity on the other side.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{AmmError, Result};
use crate::invariant::{CurveMode, CurveParams, PoolState};
use crate::numerics::{fd, FixedDecimal};
use crate::polar::{angle_to_price, price_to_angle, NINETY};
use crate::swap_cartesian::{check_pair, solve_partner, spot_price, SwapQuote};

/// Distance in degrees under which a price angle is treated as sitting on a
/// tick boundary.
const SNAP_DEG: FixedDecimal = FixedDecimal::from_raw(1_000_000);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FixedDecimal", into = "FixedDecimal")]
pub struct TickGrid {
    spacing_deg: FixedDecimal,
    tick_count: u32,
}

impl TickGrid {
    pub fn new(spacing_deg: FixedDecimal) -> Result<Self> {
        if !spacing_deg.is_positive() {
            return Err(AmmError::validation(format!("tick spacing must be positive, got {spacing_deg}")));
        }
        if NINETY.raw() % spacing_deg.raw() != 0 {
            return Err(AmmError::validation(format!("tick spacing {spacing_deg} does not divide 90")));
        }
        let count = NINETY.raw() / spacing_deg.raw();
        let tick_count = u32::try_from(count)
            .map_err(|_| AmmError::validation(format!("tick spacing {spacing_deg} is too fine")))?;
        Ok(TickGrid {
            spacing_deg,
            tick_count,
        })
    }

    pub fn spacing_deg(&self) -> FixedDecimal {
        self.spacing_deg
    }

    pub fn tick_count(&self) -> u32 {
        self.tick_count
    }

    /// Angle of boundary `k` (0 ≤ k ≤ tick_count).
    pub fn boundary(&self, k: u32) -> FixedDecimal {
        FixedDecimal::from_raw(self.spacing_deg.raw() * k as i128)
    }

    /// Boundary index of an aligned angle.
    pub fn boundary_index(&self, angle: FixedDecimal) -> Result<u32> {
        if angle.is_negative() || angle > NINETY || angle.raw() % self.spacing_deg.raw() != 0 {
            return Err(AmmError::validation(format!(
                "angle {angle} is not a boundary of the {}° grid",
                self.spacing_deg
            )));
        }
        Ok((angle.raw() / self.spacing_deg.raw()) as u32)
    }
}

impl Default for TickGrid {
    fn default() -> Self {
        TickGrid::new(FixedDecimal::ONE).expect("1° grid")
    }
}

impl TryFrom<FixedDecimal> for TickGrid {
    type Error = AmmError;

    fn try_from(spacing: FixedDecimal) -> Result<Self> {
        TickGrid::new(spacing)
    }
}

impl From<TickGrid> for FixedDecimal {
    fn from(grid: TickGrid) -> Self {
        grid.spacing_deg
    }
}

/// Prices spanned by one tick. `hi` is `None` for the tick touching 0°,
/// whose price range is unbounded above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PriceInterval {
    pub lo: FixedDecimal,
    pub hi: Option<FixedDecimal>,
}

pub fn tick_width_in_price(grid: &TickGrid, tick_index: u32) -> Result<PriceInterval> {
    if tick_index >= grid.tick_count {
        return Err(AmmError::validation(format!(
            "tick {tick_index} out of range for {} ticks",
            grid.tick_count
        )));
    }
    let lower = grid.boundary(tick_index);
    let upper = grid.boundary(tick_index + 1);
    let hi = if lower.is_zero() {
        None
    } else {
        Some(angle_to_price(lower)?)
    };
    Ok(PriceInterval {
        lo: angle_to_price(upper)?,
        hi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Long,
    Short,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpPosition {
    id: u64,
    lower_deg: FixedDecimal,
    upper_deg: FixedDecimal,
    liquidity: FixedDecimal,
    side: Side,
}

impl LpPosition {
    pub fn new(id: u64, lower_deg: FixedDecimal, upper_deg: FixedDecimal, liquidity: FixedDecimal) -> Self {
        LpPosition {
            id,
            lower_deg,
            upper_deg,
            liquidity,
            side: Side::Long,
        }
    }

    pub(crate) fn short(id: u64, lower_deg: FixedDecimal, upper_deg: FixedDecimal, liquidity: FixedDecimal) -> Self {
        LpPosition {
            side: Side::Short,
            ..LpPosition::new(id, lower_deg, upper_deg, liquidity)
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn lower_deg(&self) -> FixedDecimal {
        self.lower_deg
    }

    pub fn upper_deg(&self) -> FixedDecimal {
        self.upper_deg
    }

    pub fn liquidity(&self) -> FixedDecimal {
        self.liquidity
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Liquidity with the sign of the side.
    pub fn signed_liquidity(&self) -> FixedDecimal {
        match self.side {
            Side::Long => self.liquidity,
            Side::Short => FixedDecimal::from_raw(-self.liquidity.raw()),
        }
    }

    /// Whether the band covers `angle` under the `[lower, upper)` rule, with
    /// 90° belonging to the band that ends there.
    pub fn contains(&self, angle: FixedDecimal) -> bool {
        if angle == NINETY {
            return self.upper_deg == NINETY;
        }
        self.lower_deg <= angle && angle < self.upper_deg
    }

    fn validate(&self, grid: &TickGrid) -> Result<()> {
        grid.boundary_index(self.lower_deg)?;
        grid.boundary_index(self.upper_deg)?;
        if self.lower_deg >= self.upper_deg {
            return Err(AmmError::validation(format!(
                "position {} has lower {} ≥ upper {}",
                self.id, self.lower_deg, self.upper_deg
            )));
        }
        if !self.liquidity.is_positive() {
            return Err(AmmError::validation(format!(
                "position {} has non-positive liquidity {}",
                self.id, self.liquidity
            )));
        }
        Ok(())
    }
}

/// Positions plus the net liquidity change at each boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LedgerRepr", into = "LedgerRepr")]
pub struct TickLedger {
    grid: TickGrid,
    positions: BTreeMap<u64, LpPosition>,
    net_delta: BTreeMap<u32, FixedDecimal>,
}

#[derive(Serialize, Deserialize)]
struct LedgerRepr {
    spacing_deg: TickGrid,
    positions: Vec<LpPosition>,
}

impl TryFrom<LedgerRepr> for TickLedger {
    type Error = AmmError;

    fn try_from(repr: LedgerRepr) -> Result<Self> {
        let mut ledger = TickLedger::new(repr.spacing_deg);
        for p in repr.positions {
            ledger.insert(p)?;
        }
        ledger.check_non_negative()?;
        Ok(ledger)
    }
}

impl From<TickLedger> for LedgerRepr {
    fn from(ledger: TickLedger) -> Self {
        LedgerRepr {
            spacing_deg: ledger.grid,
            positions: ledger.positions.into_values().collect(),
        }
    }
}

impl TickLedger {
    pub fn new(grid: TickGrid) -> Self {
        TickLedger {
            grid,
            positions: BTreeMap::new(),
            net_delta: BTreeMap::new(),
        }
    }

    pub fn grid(&self) -> &TickGrid {
        &self.grid
    }

    pub fn positions(&self) -> impl Iterator<Item = &LpPosition> {
        self.positions.values()
    }

    pub fn position(&self, id: u64) -> Option<&LpPosition> {
        self.positions.get(&id)
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Smallest id not yet used.
    pub fn next_id(&self) -> u64 {
        self.positions.keys().next_back().map_or(1, |k| k + 1)
    }

    /// Signed liquidity change when crossing boundary `k` toward larger angles.
    pub fn net_delta(&self, k: u32) -> FixedDecimal {
        self.net_delta.get(&k).copied().unwrap_or(FixedDecimal::ZERO)
    }

    pub fn add_position(&mut self, position: LpPosition) -> Result<()> {
        let before = self.clone();
        self.insert(position)?;
        if let Err(e) = self.check_non_negative() {
            *self = before;
            return Err(e);
        }
        Ok(())
    }

    pub fn remove_position(&mut self, id: u64) -> Result<LpPosition> {
        let position = self
            .positions
            .get(&id)
            .cloned()
            .ok_or_else(|| AmmError::NotFound(format!("no position with id {id}")))?;
        let before = self.clone();
        self.positions.remove(&id);
        self.shift(&position, true)?;
        if let Err(e) = self.check_non_negative() {
            *self = before;
            return Err(e);
        }
        Ok(position)
    }

    fn insert(&mut self, position: LpPosition) -> Result<()> {
        position.validate(&self.grid)?;
        if self.positions.contains_key(&position.id) {
            return Err(AmmError::validation(format!("duplicate position id {}", position.id)));
        }
        self.shift(&position, false)?;
        self.positions.insert(position.id, position);
        Ok(())
    }

    fn shift(&mut self, position: &LpPosition, remove: bool) -> Result<()> {
        let lower = self.grid.boundary_index(position.lower_deg)?;
        let upper = self.grid.boundary_index(position.upper_deg)?;
        let signed = if remove {
            position.signed_liquidity().neg()?
        } else {
            position.signed_liquidity()
        };
        for (k, delta) in [(lower, signed), (upper, signed.neg()?)] {
            let entry = self.net_delta.entry(k).or_insert(FixedDecimal::ZERO);
            *entry = entry.add(delta)?;
            if entry.is_zero() {
                self.net_delta.remove(&k);
            }
        }
        Ok(())
    }

    fn check_non_negative(&self) -> Result<()> {
        let mut running = FixedDecimal::ZERO;
        for (&k, &d) in &self.net_delta {
            running = running.add(d)?;
            if running.is_negative() {
                return Err(AmmError::validation(format!(
                    "aggregate liquidity would turn negative at {}°",
                    self.grid.boundary(k)
                )));
            }
        }
        Ok(())
    }

    /// Sum of the liquidity of all bands containing `angle_deg`.
    pub fn active_liquidity(&self, angle_deg: FixedDecimal) -> Result<FixedDecimal> {
        if angle_deg.is_negative() || angle_deg > NINETY {
            return Err(AmmError::domain(format!("angle {angle_deg} outside [0, 90]")));
        }
        let mut sum = FixedDecimal::ZERO;
        for (&k, &d) in &self.net_delta {
            let b = self.grid.boundary(k);
            let inside = if angle_deg == NINETY { b < NINETY } else { b <= angle_deg };
            if !inside {
                break;
            }
            sum = sum.add(d)?;
        }
        Ok(sum)
    }

    /// Nearest boundary strictly beyond `angle` in the given direction where
    /// liquidity changes, or the end of the quadrant.
    fn next_change(&self, angle: FixedDecimal, upward: bool) -> FixedDecimal {
        if upward {
            self.net_delta
                .keys()
                .map(|&k| self.grid.boundary(k))
                .find(|&b| b > angle)
                .unwrap_or(NINETY)
        } else {
            self.net_delta
                .keys()
                .rev()
                .map(|&k| self.grid.boundary(k))
                .find(|&b| b < angle)
                .unwrap_or(FixedDecimal::ZERO)
        }
    }
}

/// Unit-liquidity reserves at tick angle `angle_deg`.
pub fn unit_reserves(params: &CurveParams, angle_deg: FixedDecimal) -> Result<[FixedDecimal; 2]> {
    if angle_deg.is_zero() {
        return Ok([FixedDecimal::ZERO, params.l]);
    }
    let p = angle_to_price(angle_deg)?;
    let root = FixedDecimal::ONE.add(p.square()?)?.sqrt()?;
    let x = params.l.mul(FixedDecimal::ONE.sub(p.div(root)?)?)?;
    let y = params.l.mul(FixedDecimal::ONE.sub(FixedDecimal::ONE.div(root)?)?)?;
    Ok([x, y])
}

fn scaled(unit: [FixedDecimal; 2], liquidity: FixedDecimal) -> Result<Vec<FixedDecimal>> {
    Ok(vec![unit[0].mul(liquidity)?, unit[1].mul(liquidity)?])
}

/// Tick angle of the pool's current price, snapped to a grid boundary when
/// within rounding distance of one.
pub fn current_angle(params: &CurveParams, grid: &TickGrid, state: &PoolState) -> Result<FixedDecimal> {
    require_circle(params)?;
    let r = params.radius(state.liquidity_scale)?;
    let (dx, dy) = (r.sub(state.reserves[0])?, r.sub(state.reserves[1])?);
    let angle = if dy.is_zero() {
        FixedDecimal::ZERO
    } else {
        price_to_angle(dx.div(dy)?.max(FixedDecimal::ZERO))?
    };
    let k = angle.raw().div_euclid(grid.spacing_deg.raw());
    for b in [k, k + 1] {
        let boundary = FixedDecimal::from_raw(b * grid.spacing_deg.raw());
        if boundary <= NINETY && boundary.abs_diff(angle) <= SNAP_DEG {
            return Ok(boundary);
        }
    }
    Ok(angle)
}

/// Re-anchors the state to the ledger's liquidity at the current price.
pub fn reanchor(params: &CurveParams, ledger: &TickLedger, state: &PoolState) -> Result<PoolState> {
    let angle = current_angle(params, &ledger.grid, state)?;
    let liquidity = ledger.active_liquidity(angle)?;
    if !liquidity.is_positive() {
        return Err(AmmError::validation(format!("no liquidity at the current angle {angle}°")));
    }
    if liquidity == state.liquidity_scale {
        return Ok(state.clone());
    }
    Ok(PoolState::new(
        scaled(unit_reserves(params, angle)?, liquidity)?,
        liquidity,
    ))
}

fn require_circle(params: &CurveParams) -> Result<()> {
    if params.mode != CurveMode::Ccmm || params.n != 2 {
        return Err(AmmError::validation("tick swaps need a two-token CCMM pool"));
    }
    Ok(())
}

/// One constant-liquidity leg of a tick swap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub index: usize,
    pub angle_from: FixedDecimal,
    pub angle_to: FixedDecimal,
    pub liquidity: FixedDecimal,
    pub delta_in: FixedDecimal,
    pub delta_out: FixedDecimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickSwap {
    pub quote: SwapQuote,
    pub segments: Vec<Segment>,
}

/// Sells exactly `delta_in` of `token_in`, crossing as many ticks as needed.
pub fn swap_across_ticks(
    params: &CurveParams,
    ledger: &TickLedger,
    state: &PoolState,
    token_in: usize,
    delta_in: FixedDecimal,
) -> Result<TickSwap> {
    walk(params, ledger, state, token_in, delta_in, false)
}

/// Buys exactly `delta_out` of the other token, crossing ticks as needed.
pub fn swap_across_ticks_exact_out(
    params: &CurveParams,
    ledger: &TickLedger,
    state: &PoolState,
    token_in: usize,
    delta_out: FixedDecimal,
) -> Result<TickSwap> {
    walk(params, ledger, state, token_in, delta_out, true)
}

fn walk(
    params: &CurveParams,
    ledger: &TickLedger,
    state: &PoolState,
    token_in: usize,
    amount: FixedDecimal,
    exact_out: bool,
) -> Result<TickSwap> {
    require_circle(params)?;
    let (i, j) = (token_in, 1 - token_in.min(1));
    check_pair(params, i, j)?;
    state.validate(params)?;
    if amount.is_negative() {
        return Err(AmmError::validation(format!("trade amount must be non-negative, got {amount}")));
    }
    let price_before = spot_price(params, state, i, j).unwrap_or(FixedDecimal::MAX);
    if amount.is_zero() {
        return Ok(TickSwap {
            quote: SwapQuote::zero(state, i, j, price_before),
            segments: Vec::new(),
        });
    }
    // selling x pushes the price down and the angle up
    let upward = i == 0;
    let mut angle = current_angle(params, &ledger.grid, state)?;
    let mut reserves = state.reserves.clone();
    let mut scale = state.liquidity_scale;
    let mut remaining = amount;
    let (mut total_in, mut total_out) = (FixedDecimal::ZERO, FixedDecimal::ZERO);
    let mut segments = Vec::new();

    while remaining.is_positive() {
        let edge = if upward { NINETY } else { FixedDecimal::ZERO };
        let stuck = |reason: String, filled_in, filled_out| AmmError::InsufficientLiquidity {
            reason,
            filled_in,
            filled_out,
        };
        if angle == edge {
            return Err(stuck(
                format!("price reached the end of the curve at {angle}°"),
                total_in,
                total_out,
            ));
        }
        let target = ledger.next_change(angle, upward);
        let probe = if upward { angle } else { target };
        let liquidity = ledger.active_liquidity(probe)?;
        if !liquidity.is_positive() {
            return Err(stuck(format!("ran out of liquidity at {angle}°"), total_in, total_out));
        }
        if liquidity != scale {
            reserves = scaled(unit_reserves(params, angle)?, liquidity)?;
            scale = liquidity;
        }
        let at_target = scaled(unit_reserves(params, target)?, liquidity)?;
        let cap_in = at_target[i].sub(reserves[i])?.max(FixedDecimal::ZERO);
        let cap_out = reserves[j].sub(at_target[j])?.max(FixedDecimal::ZERO);
        let cap = if exact_out { cap_out } else { cap_in };
        let seg_state = PoolState::new(reserves.clone(), scale);

        let (seg_in, seg_out, next_reserves, next_angle) = if remaining < cap {
            let mut next = reserves.clone();
            let (seg_in, seg_out) = if exact_out {
                next[j] = reserves[j].sub(remaining)?;
                next[i] = solve_partner(params, &seg_state, j, i, next[j])?;
                (next[i].sub(reserves[i])?.max(FixedDecimal::ZERO), remaining)
            } else {
                next[i] = reserves[i].add(remaining)?;
                next[j] = solve_partner(params, &seg_state, i, j, next[i])?;
                (remaining, reserves[j].sub(next[j])?.max(FixedDecimal::ZERO))
            };
            next[i] = reserves[i].add(seg_in)?;
            next[j] = reserves[j].sub(seg_out)?;
            let next_angle = current_angle(params, &ledger.grid, &PoolState::new(next.clone(), scale))?;
            (seg_in, seg_out, next, next_angle)
        } else {
            (cap_in, cap_out, at_target, target)
        };
        segments.push(Segment {
            index: segments.len(),
            angle_from: angle,
            angle_to: next_angle,
            liquidity,
            delta_in: seg_in,
            delta_out: seg_out,
        });
        total_in = total_in.add(seg_in)?;
        total_out = total_out.add(seg_out)?;
        remaining = remaining.sub(if exact_out { seg_out } else { seg_in })?;
        reserves = next_reserves;
        angle = next_angle;
    }

    let after = PoolState::new(reserves, scale);
    let price_after = spot_price(params, &after, i, j).unwrap_or(FixedDecimal::MAX);
    Ok(TickSwap {
        quote: SwapQuote {
            token_in: i,
            token_out: j,
            amount_in: total_in,
            amount_out: total_out,
            price_before,
            price_after,
            new_reserves: after.reserves,
            liquidity_scale: scale,
        },
        segments,
    })
}

/// Default grid spacing in degrees.
pub fn default_spacing() -> FixedDecimal {
    fd("1")
}
