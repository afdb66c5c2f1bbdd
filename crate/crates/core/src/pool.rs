//! Pool documents, trade routing and replay.

use serde::{Deserialize, Serialize};

use crate::error::{AmmError, Result};
use crate::invariant::{is_on_curve, residual, CurveMode, CurveParams, PoolState};
use crate::numerics::FixedDecimal;
use crate::polar::polar_swap;
use crate::swap_cartesian::{commit, swap_exact_in, swap_exact_out, SwapQuote};
use crate::ticks::{
    reanchor, swap_across_ticks, swap_across_ticks_exact_out, LpPosition, Segment, TickGrid, TickLedger,
};

pub const FORMAT_VERSION: u32 = 1;

/// Everything needed to reload a pool: curve, state and (for two-token
/// circles) the tick ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolFile {
    pub format_version: u32,
    #[serde(flatten)]
    pub params: CurveParams,
    #[serde(flatten)]
    pub state: PoolState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger: Option<TickLedger>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Cartesian,
    Polar,
    Ticks,
}

impl std::str::FromStr for Route {
    type Err = AmmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cartesian" => Ok(Route::Cartesian),
            "polar" => Ok(Route::Polar),
            "ticks" => Ok(Route::Ticks),
            other => Err(AmmError::validation(format!("unknown route '{other}'"))),
        }
    }
}

/// A quote plus the tick segments it crossed, when routed through ticks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutedQuote {
    pub route: Route,
    pub quote: SwapQuote,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<Segment>>,
}

impl PoolFile {
    /// A fresh pool holding `reserve` of every token. Two-token circles get a
    /// ledger with one full-range position carrying the pool's liquidity.
    pub fn init(params: CurveParams, reserve: FixedDecimal, grid: TickGrid) -> Result<Self> {
        let state = PoolState::born_on_curve(&params, reserve)?;
        let ledger = if params.mode == CurveMode::Ccmm && params.n == 2 {
            let mut ledger = TickLedger::new(grid);
            ledger.add_position(LpPosition::new(
                1,
                FixedDecimal::ZERO,
                FixedDecimal::from_int(90),
                state.liquidity_scale,
            ))?;
            Some(ledger)
        } else {
            None
        };
        let pool = PoolFile {
            format_version: FORMAT_VERSION,
            params,
            state,
            ledger,
        };
        pool.validate()?;
        Ok(pool)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(AmmError::validation(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        self.params.validate()?;
        self.state.validate(&self.params)?;
        if !is_on_curve(&self.params, &self.state)? {
            return Err(AmmError::validation(format!(
                "reserves are off-curve (residual {})",
                residual(&self.params, &self.state)?
            )));
        }
        if self.ledger.is_some() && !self.has_tick_curve() {
            return Err(AmmError::validation("a tick ledger needs a two-token CCMM pool"));
        }
        Ok(())
    }

    fn has_tick_curve(&self) -> bool {
        self.params.mode == CurveMode::Ccmm && self.params.n == 2
    }

    /// Whether every position spans the whole quadrant, so the curve has the
    /// same liquidity everywhere.
    fn ledger_is_uniform(&self) -> bool {
        self.ledger.as_ref().is_none_or(|l| {
            l.positions()
                .all(|p| p.lower_deg().is_zero() && p.upper_deg() == FixedDecimal::from_int(90))
        })
    }

    /// Route used when none is requested: ticks whenever a ledger exists.
    pub fn default_route(&self) -> Route {
        if self.ledger.is_some() {
            Route::Ticks
        } else {
            Route::Cartesian
        }
    }

    pub fn quote(
        &self,
        token_in: usize,
        token_out: usize,
        amount: FixedDecimal,
        exact_out: bool,
        route: Route,
    ) -> Result<RoutedQuote> {
        let (quote, segments) = match route {
            Route::Cartesian => {
                let q = if exact_out {
                    swap_exact_out(&self.params, &self.state, token_in, token_out, amount)?
                } else {
                    swap_exact_in(&self.params, &self.state, token_in, token_out, amount)?
                };
                (q, None)
            }
            Route::Polar => (
                polar_swap(&self.params, &self.state, token_in, token_out, amount, exact_out)?,
                None,
            ),
            Route::Ticks => {
                let ledger = self
                    .ledger
                    .as_ref()
                    .ok_or_else(|| AmmError::validation("the ticks route needs a pool with a ledger"))?;
                if token_in > 1 || token_out != 1 - token_in {
                    return Err(AmmError::Shape("tick swaps trade token 0 against token 1".into()));
                }
                let t = if exact_out {
                    swap_across_ticks_exact_out(&self.params, ledger, &self.state, token_in, amount)?
                } else {
                    swap_across_ticks(&self.params, ledger, &self.state, token_in, amount)?
                };
                (t.quote, Some(t.segments))
            }
        };
        Ok(RoutedQuote { route, quote, segments })
    }

    /// Quotes and applies a trade. Routes that ignore tick boundaries are
    /// refused when the ledger's liquidity is not uniform.
    pub fn swap(
        &mut self,
        token_in: usize,
        token_out: usize,
        amount: FixedDecimal,
        exact_out: bool,
        route: Route,
    ) -> Result<RoutedQuote> {
        if route != Route::Ticks && !self.ledger_is_uniform() {
            return Err(AmmError::validation(
                "this pool has range positions; swaps must use the ticks route",
            ));
        }
        let routed = self.quote(token_in, token_out, amount, exact_out, route)?;
        commit(&mut self.state, &routed.quote)?;
        Ok(routed)
    }

    /// Adds a range position and re-anchors the reserves to the new
    /// liquidity at the current price.
    pub fn add_position(&mut self, lower: FixedDecimal, upper: FixedDecimal, liquidity: FixedDecimal) -> Result<u64> {
        let ledger = self
            .ledger
            .as_mut()
            .ok_or_else(|| AmmError::validation("positions need a pool with a ledger"))?;
        let id = ledger.next_id();
        let before = ledger.clone();
        ledger.add_position(LpPosition::new(id, lower, upper, liquidity))?;
        match reanchor(&self.params, ledger, &self.state) {
            Ok(state) => {
                self.state = state;
                Ok(id)
            }
            Err(e) => {
                *ledger = before;
                Err(e)
            }
        }
    }

    pub fn remove_position(&mut self, id: u64) -> Result<LpPosition> {
        let ledger = self
            .ledger
            .as_mut()
            .ok_or_else(|| AmmError::validation("positions need a pool with a ledger"))?;
        let before = ledger.clone();
        let removed = ledger.remove_position(id)?;
        match reanchor(&self.params, ledger, &self.state) {
            Ok(state) => {
                self.state = state;
                Ok(removed)
            }
            Err(e) => {
                *ledger = before;
                Err(e)
            }
        }
    }
}

/// One row of a trade log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trade {
    pub seq: u64,
    pub token_in: usize,
    pub token_out: usize,
    pub amount_in: FixedDecimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeResult {
    pub seq: u64,
    pub amount_in: FixedDecimal,
    pub amount_out: FixedDecimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplaySummary {
    pub trades: usize,
    pub final_reserves: Vec<FixedDecimal>,
    pub liquidity_scale: FixedDecimal,
    pub max_residual: FixedDecimal,
    pub outputs: Vec<TradeResult>,
}

/// A replay that stopped at a failing trade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayError {
    pub seq: u64,
    pub error: AmmError,
}

impl std::fmt::Display for ReplayError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "trade {} failed: {}", self.seq, self.error)
    }
}

impl std::error::Error for ReplayError {}

pub fn check_trades(params: &CurveParams, trades: &[Trade]) -> Result<()> {
    let mut last: Option<u64> = None;
    for t in trades {
        if last.is_some_and(|s| t.seq <= s) {
            return Err(AmmError::validation(format!("seq {} is not increasing", t.seq)));
        }
        if t.token_in >= params.n || t.token_out >= params.n {
            return Err(AmmError::validation(format!("trade {} names a token ≥ n = {}", t.seq, params.n)));
        }
        if t.amount_in.is_negative() {
            return Err(AmmError::validation(format!("trade {} has a negative amount", t.seq)));
        }
        last = Some(t.seq);
    }
    Ok(())
}

/// Applies trades in order. Pools with a ledger trade through ticks, others
/// through the closed-form pairwise swap. The pool is left at the state
/// reached before a failing trade.
pub fn replay(pool: &mut PoolFile, trades: &[Trade]) -> std::result::Result<ReplaySummary, ReplayError> {
    check_trades(&pool.params, trades).map_err(|error| ReplayError { seq: 0, error })?;
    let route = pool.default_route();
    let mut max_residual = residual(&pool.params, &pool.state)
        .and_then(|r| r.abs())
        .map_err(|error| ReplayError { seq: 0, error })?;
    let mut outputs = Vec::with_capacity(trades.len());
    for t in trades {
        let step = pool
            .swap(t.token_in, t.token_out, t.amount_in, false, route)
            .and_then(|q| Ok((q, residual(&pool.params, &pool.state)?.abs()?)));
        let (q, r) = step.map_err(|error| ReplayError { seq: t.seq, error })?;
        max_residual = max_residual.max(r);
        outputs.push(TradeResult {
            seq: t.seq,
            amount_in: q.quote.amount_in,
            amount_out: q.quote.amount_out,
        });
    }
    Ok(ReplaySummary {
        trades: trades.len(),
        final_reserves: pool.state.reserves.clone(),
        liquidity_scale: pool.state.liquidity_scale,
        max_residual,
        outputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fd;

    #[test]
    fn init_two_token_pool() {
        let pool = PoolFile::init(CurveParams::ccmm(2).unwrap(), FixedDecimal::ONE, TickGrid::default()).unwrap();
        assert_eq!(pool.state.reserves, vec![FixedDecimal::ONE; 2]);
        assert_eq!(pool.state.liquidity_scale, FixedDecimal::ONE);
        assert_eq!(pool.default_route(), Route::Ticks);
        let six = PoolFile::init(CurveParams::ccmm(6).unwrap(), FixedDecimal::ONE, TickGrid::default()).unwrap();
        assert!(six.ledger.is_none());
    }

    #[test]
    fn json_round_trip() {
        let mut pool = PoolFile::init(CurveParams::ccmm(2).unwrap(), FixedDecimal::ONE, TickGrid::default()).unwrap();
        pool.add_position(fd("40"), fd("55"), fd("3")).unwrap();
        let text = serde_json::to_string_pretty(&pool).unwrap();
        let back: PoolFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, pool);
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["format_version", "n", "mode", "l", "alphas", "beta", "c", "reserves", "liquidity_scale", "ledger"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let mut wrong = pool.clone();
        wrong.format_version = 9;
        assert!(wrong.validate().is_err());
    }

    #[test]
    fn range_pools_insist_on_ticks() {
        let mut pool = PoolFile::init(CurveParams::ccmm(2).unwrap(), FixedDecimal::ONE, TickGrid::default()).unwrap();
        pool.swap(0, 1, fd("0.1"), false, Route::Cartesian).unwrap();
        pool.add_position(fd("40"), fd("55"), fd("3")).unwrap();
        assert!(pool.swap(0, 1, fd("0.1"), false, Route::Polar).is_err());
        pool.swap(0, 1, fd("0.1"), false, Route::Ticks).unwrap();
    }

    #[test]
    fn replay_reports_failing_seq() {
        let mut pool = PoolFile::init(CurveParams::ccmm(3).unwrap(), FixedDecimal::ONE, TickGrid::default()).unwrap();
        let trades = vec![
            Trade { seq: 1, token_in: 0, token_out: 1, amount_in: fd("0.2") },
            Trade { seq: 2, token_in: 1, token_out: 2, amount_in: fd("500") },
        ];
        let err = replay(&mut pool, &trades).unwrap_err();
        assert_eq!(err.seq, 2);
        assert!(matches!(err.error, AmmError::InsufficientLiquidity { .. }));
        let bad = vec![
            Trade { seq: 2, token_in: 0, token_out: 1, amount_in: fd("0.2") },
            Trade { seq: 2, token_in: 1, token_out: 0, amount_in: fd("0.2") },
        ];
        assert!(matches!(check_trades(&pool.params, &bad), Err(AmmError::Validation(_))));
    }
}
