//! Closed-form swaps along the invariant curve.
//!
//! Every trade moves exactly two reserves: the input token `i` and the output
//! token `j`. All other reserves stay fixed, so an n-token pool reduces to a
//! two-token curve whose radius (CCMM) or budget (CSEMM) absorbs the frozen
//! coordinates. Positive amounts always mean tokens entering (`amount_in`) or
//! leaving (`amount_out`) the pool. Quotes are pure; [`commit`] applies them.

use serde::{Deserialize, Serialize};

use crate::error::{AmmError, Result};
use crate::invariant::{csemm_term, eta, gradient, shifted_offsets, CurveMode, CurveParams, PoolState};
use crate::numerics::FixedDecimal;

/// Result of a quoted trade. Prices are the marginal price of the input
/// token in units of the output token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapQuote {
    pub token_in: usize,
    pub token_out: usize,
    pub amount_in: FixedDecimal,
    pub amount_out: FixedDecimal,
    pub price_before: FixedDecimal,
    pub price_after: FixedDecimal,
    pub new_reserves: Vec<FixedDecimal>,
    pub liquidity_scale: FixedDecimal,
}

impl SwapQuote {
    /// Quote that leaves the pool untouched.
    pub fn zero(state: &PoolState, token_in: usize, token_out: usize, price: FixedDecimal) -> Self {
        SwapQuote {
            token_in,
            token_out,
            amount_in: FixedDecimal::ZERO,
            amount_out: FixedDecimal::ZERO,
            price_before: price,
            price_after: price,
            new_reserves: state.reserves.clone(),
            liquidity_scale: state.liquidity_scale,
        }
    }
}

/// Applies a quote to the state it was computed from.
pub fn commit(state: &mut PoolState, quote: &SwapQuote) -> Result<()> {
    if quote.new_reserves.len() != state.reserves.len() {
        return Err(AmmError::Shape("quote does not match pool size".into()));
    }
    state.reserves = quote.new_reserves.clone();
    state.liquidity_scale = quote.liquidity_scale;
    Ok(())
}

/// Marginal price of token `i` in units of token `j`: the ratio of the
/// invariant's partial derivatives.
pub fn spot_price(params: &CurveParams, state: &PoolState, i: usize, j: usize) -> Result<FixedDecimal> {
    check_pair(params, i, j)?;
    let g = gradient(params, state)?;
    if g[j].is_zero() {
        return Err(AmmError::domain(format!("price of token {i} in token {j} is unbounded here")));
    }
    g[i].div(g[j])
}

/// Lower-arc CCMM: `y = l·s − √(x (2·l·s − x))` for a two-token pool.
pub fn ccmm_y_of_x(params: &CurveParams, x: FixedDecimal, scale: FixedDecimal) -> Result<FixedDecimal> {
    let r = params.radius(scale)?;
    if x.is_negative() || x > r {
        return Err(AmmError::domain(format!("x = {x} lies outside [0, {r}]")));
    }
    r.sub(x.mul(r.mul_int(2)?.sub(x)?)?.sqrt()?)
}

/// Two-token CSEMM: `y = α_y·s·(1 − (1 − |x/(α_x s) − 1|^η_x)^(1/η_y))`.
pub fn csemm_y_of_x(params: &CurveParams, x: FixedDecimal, scale: FixedDecimal) -> Result<FixedDecimal> {
    if params.alphas.len() != 2 {
        return Err(AmmError::Shape("csemm_y_of_x needs a two-token pool".into()));
    }
    let state = PoolState::new(vec![x, FixedDecimal::ZERO], scale);
    let mut p = params.clone();
    p.mode = CurveMode::Csemm;
    p.n = 2;
    solve_partner(&p, &state, 0, 1, x).map_err(|e| match e {
        AmmError::InsufficientLiquidity { reason, .. } => AmmError::Domain(reason),
        other => other,
    })
}

/// Reserve of token `j` that keeps the pool on-curve once token `i` holds
/// `new_xi`, all other reserves fixed.
pub fn solve_partner(
    params: &CurveParams,
    state: &PoolState,
    i: usize,
    j: usize,
    new_xi: FixedDecimal,
) -> Result<FixedDecimal> {
    check_pair(params, i, j)?;
    params.check_len(&state.reserves)?;
    if new_xi.is_negative() {
        return Err(AmmError::infeasible(format!("reserve of token {i} would turn negative")));
    }
    let s = state.liquidity_scale;
    let new_xj = match params.mode {
        CurveMode::Ccmm => {
            let r = params.radius(s)?;
            let mut rho2 = r.square()?;
            for (k, &x) in state.reserves.iter().enumerate() {
                if k != i && k != j {
                    rho2 = rho2.sub(x.sub(r)?.square()?)?;
                }
            }
            if !rho2.is_positive() {
                return Err(AmmError::infeasible("no room left on the curve for this pair"));
            }
            if new_xi > r {
                return Err(AmmError::infeasible(format!("token {i} would pass the curve's far edge")));
            }
            let rem = rho2.sub(r.sub(new_xi)?.square()?)?;
            if rem.is_negative() {
                return Err(AmmError::infeasible("trade exits the curve"));
            }
            r.sub(rem.sqrt()?)?
        }
        CurveMode::Csemm => {
            let mut budget = FixedDecimal::ONE;
            for (k, (&x, &a)) in state.reserves.iter().zip(&params.alphas).enumerate() {
                if k != i && k != j {
                    budget = budget.sub(csemm_term(a, s, x)?)?;
                }
            }
            let (ai, aj) = (params.alphas[i], params.alphas[j]);
            if ai.is_positive() && new_xi > ai.mul(s)? {
                return Err(AmmError::infeasible(format!("token {i} would leave the trading branch")));
            }
            let rem = budget.sub(csemm_term(ai, s, new_xi)?)?;
            let ej = eta(aj)?;
            if rem.is_negative() || (rem.is_zero() && ej.is_negative()) {
                return Err(AmmError::infeasible("trade exits the curve"));
            }
            let w = rem.pow(FixedDecimal::ONE.div(ej)?)?;
            aj.mul(s)?.mul(FixedDecimal::ONE.sub(w)?)?
        }
        CurveMode::Shifted => {
            let r = params.radius(s)?;
            let beta = params.beta;
            // offset of the known coordinate from the centre
            let known = if i == 0 {
                r.sub(new_xi)?
            } else {
                r.sub(new_xi.div(params.c)?)?
            };
            if known.is_negative() {
                return Err(AmmError::infeasible(format!("token {i} would pass the curve's far edge")));
            }
            let rem = r.pow(beta)?.sub(known.pow(beta)?)?;
            if rem.is_negative() {
                return Err(AmmError::infeasible("trade exits the curve"));
            }
            let off = rem.pow(FixedDecimal::ONE.div(beta)?)?;
            if j == 0 {
                r.sub(off)?
            } else {
                params.c.mul(r.sub(off)?)?
            }
        }
    };
    if new_xj.is_negative() {
        return Err(AmmError::infeasible(format!("reserve of token {j} would turn negative")));
    }
    Ok(new_xj)
}

/// Sells exactly `delta_in` of token `i` for token `j`.
pub fn swap_exact_in(
    params: &CurveParams,
    state: &PoolState,
    i: usize,
    j: usize,
    delta_in: FixedDecimal,
) -> Result<SwapQuote> {
    prepare(params, state, i, j, delta_in)?;
    let price_before = spot_price(params, state, i, j)?;
    if delta_in.is_zero() {
        return Ok(SwapQuote::zero(state, i, j, price_before));
    }
    let new_xi = state.reserves[i].add(delta_in)?;
    let new_xj = solve_partner(params, state, i, j, new_xi)?;
    let amount_out = state.reserves[j].sub(new_xj)?.max(FixedDecimal::ZERO);
    finish(params, state, i, j, delta_in, amount_out, price_before)
}

/// Buys exactly `delta_out` of token `j`, paying with token `i`.
pub fn swap_exact_out(
    params: &CurveParams,
    state: &PoolState,
    i: usize,
    j: usize,
    delta_out: FixedDecimal,
) -> Result<SwapQuote> {
    prepare(params, state, i, j, delta_out)?;
    let price_before = spot_price(params, state, i, j)?;
    if delta_out.is_zero() {
        return Ok(SwapQuote::zero(state, i, j, price_before));
    }
    let new_xj = state.reserves[j].sub(delta_out)?;
    if new_xj.is_negative() {
        return Err(AmmError::infeasible(format!(
            "pool holds only {} of token {j}",
            state.reserves[j]
        )));
    }
    let new_xi = solve_partner(params, state, j, i, new_xj)?;
    let amount_in = new_xi.sub(state.reserves[i])?.max(FixedDecimal::ZERO);
    finish(params, state, i, j, amount_in, delta_out, price_before)
}

pub fn ccmm_swap_exact_in(params: &CurveParams, state: &PoolState, delta_x: FixedDecimal) -> Result<SwapQuote> {
    require_mode(params, CurveMode::Ccmm)?;
    swap_exact_in(params, state, 0, 1, delta_x)
}

pub fn ccmm_swap_exact_out(params: &CurveParams, state: &PoolState, delta_y: FixedDecimal) -> Result<SwapQuote> {
    require_mode(params, CurveMode::Ccmm)?;
    swap_exact_out(params, state, 0, 1, delta_y)
}

pub fn csemm_swap_exact_in(params: &CurveParams, state: &PoolState, delta_x: FixedDecimal) -> Result<SwapQuote> {
    require_mode(params, CurveMode::Csemm)?;
    swap_exact_in(params, state, 0, 1, delta_x)
}

/// Exact-output CSEMM swap. The required input is solved from the curve with
/// each token's own α and η, which for `α_x = α_y` is the textbook inverse of
/// the exact-in formula.
pub fn csemm_swap_exact_out(params: &CurveParams, state: &PoolState, delta_y: FixedDecimal) -> Result<SwapQuote> {
    require_mode(params, CurveMode::Csemm)?;
    swap_exact_out(params, state, 0, 1, delta_y)
}

/// Pairwise swap in a pool of three or more tokens.
pub fn ndim_pairwise_swap(
    params: &CurveParams,
    state: &PoolState,
    token_in: usize,
    token_out: usize,
    delta_in: FixedDecimal,
) -> Result<SwapQuote> {
    if params.n < 3 {
        return Err(AmmError::validation("pairwise reduction is for pools of three or more tokens"));
    }
    swap_exact_in(params, state, token_in, token_out, delta_in)
}

fn require_mode(params: &CurveParams, mode: CurveMode) -> Result<()> {
    if params.mode != mode || params.n != 2 {
        return Err(AmmError::validation(format!(
            "expected a two-token {mode} pool, got an n = {} {} pool",
            params.n, params.mode
        )));
    }
    Ok(())
}

pub(crate) fn check_pair(params: &CurveParams, i: usize, j: usize) -> Result<()> {
    if i >= params.n || j >= params.n {
        return Err(AmmError::Shape(format!("token index out of range for n = {}", params.n)));
    }
    if i == j {
        return Err(AmmError::validation("token_in and token_out must differ"));
    }
    Ok(())
}

fn prepare(params: &CurveParams, state: &PoolState, i: usize, j: usize, amount: FixedDecimal) -> Result<()> {
    check_pair(params, i, j)?;
    state.validate(params)?;
    if amount.is_negative() {
        return Err(AmmError::validation(format!("trade amount must be non-negative, got {amount}")));
    }
    Ok(())
}

fn finish(
    params: &CurveParams,
    state: &PoolState,
    i: usize,
    j: usize,
    amount_in: FixedDecimal,
    amount_out: FixedDecimal,
    price_before: FixedDecimal,
) -> Result<SwapQuote> {
    let mut reserves = state.reserves.clone();
    reserves[i] = reserves[i].add(amount_in)?;
    reserves[j] = reserves[j].sub(amount_out)?;
    let after = PoolState::new(reserves, state.liquidity_scale);
    let price_after = match spot_price(params, &after, i, j) {
        Ok(p) => p,
        // the output reserve hit the axis where the curve is vertical
        Err(AmmError::Domain(_)) => FixedDecimal::MAX,
        Err(e) => return Err(e),
    };
    if params.mode == CurveMode::Shifted {
        shifted_offsets(params, params.radius(after.liquidity_scale)?, after.reserves[0], after.reserves[1])?;
    }
    Ok(SwapQuote {
        token_in: i,
        token_out: j,
        amount_in,
        amount_out,
        price_before,
        price_after,
        new_reserves: after.reserves,
        liquidity_scale: after.liquidity_scale,
    })
}
