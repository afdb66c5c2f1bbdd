//! Trading-function invariants.
//!
//! Three families share one parameter block:
//!
//! - **CCMM**, the concentrated circle `Σ (x_i − l·s)² = (l·s)²`;
//! - **CSEMM**, the superellipse `Σ |x_i/(α_i·s) − 1|^η(α_i) = 1` with
//!   `η(α) = ln 2 / ln(α/(α−1))`;
//! - the **shifted ellipse** `(x − l·s)^β + (y/c − l·s)^β = (l·s)^β`, a
//!   two-token curve whose price peak moves with `c`.
//!
//! `s` is the pool's liquidity scale. Every residual is zero exactly on the
//! curve; [`ON_CURVE_TOLERANCE`] is the threshold used everywhere downstream.

use serde::{Deserialize, Serialize};

use crate::error::{AmmError, Result};
use crate::numerics::{fd, FixedDecimal};

/// Residual magnitude under which a state counts as on-curve.
pub const ON_CURVE_TOLERANCE: FixedDecimal = FixedDecimal::from_raw(1_000_000_000);

/// Offset parameter `l = 2 + √2`, which pins the circle to both axes.
pub fn default_l() -> FixedDecimal {
    let root2 = FixedDecimal::TWO.sqrt().expect("sqrt(2)");
    FixedDecimal::TWO.add(root2).expect("2 + sqrt(2)")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveMode {
    Ccmm,
    Csemm,
    Shifted,
}

impl std::fmt::Display for CurveMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CurveMode::Ccmm => "ccmm",
            CurveMode::Csemm => "csemm",
            CurveMode::Shifted => "shifted",
        })
    }
}

impl std::str::FromStr for CurveMode {
    type Err = AmmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ccmm" => Ok(CurveMode::Ccmm),
            "csemm" => Ok(CurveMode::Csemm),
            "shifted" => Ok(CurveMode::Shifted),
            other => Err(AmmError::validation(format!("unknown curve mode '{other}'"))),
        }
    }
}

/// Full parameterisation of a pool's invariant.
///
/// `l` is used by CCMM and the shifted ellipse, `alphas` only by CSEMM,
/// `beta` and `c` only by the shifted ellipse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveParams {
    pub n: usize,
    pub mode: CurveMode,
    pub l: FixedDecimal,
    pub alphas: Vec<FixedDecimal>,
    pub beta: FixedDecimal,
    pub c: FixedDecimal,
}

impl CurveParams {
    pub fn ccmm(n: usize) -> Result<Self> {
        let l = default_l();
        let params = CurveParams {
            n,
            mode: CurveMode::Ccmm,
            l,
            alphas: vec![l; n],
            beta: FixedDecimal::TWO,
            c: FixedDecimal::ONE,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn csemm(alphas: Vec<FixedDecimal>) -> Result<Self> {
        let params = CurveParams {
            n: alphas.len(),
            mode: CurveMode::Csemm,
            l: default_l(),
            alphas,
            beta: FixedDecimal::TWO,
            c: FixedDecimal::ONE,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn shifted(beta: FixedDecimal, c: FixedDecimal) -> Result<Self> {
        let l = default_l();
        let params = CurveParams {
            n: 2,
            mode: CurveMode::Shifted,
            l,
            alphas: vec![l; 2],
            beta,
            c,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(AmmError::validation(format!("pool needs at least 2 tokens, got {}", self.n)));
        }
        if !self.l.is_positive() {
            return Err(AmmError::validation(format!("l must be positive, got {}", self.l)));
        }
        if self.beta <= FixedDecimal::ONE || self.beta > FixedDecimal::TWO {
            return Err(AmmError::validation(format!("beta must lie in (1, 2], got {}", self.beta)));
        }
        if !self.c.is_positive() {
            return Err(AmmError::validation(format!("c must be positive, got {}", self.c)));
        }
        match self.mode {
            CurveMode::Csemm => {
                if self.alphas.len() != self.n {
                    return Err(AmmError::Shape(format!(
                        "expected {} alphas, got {}",
                        self.n,
                        self.alphas.len()
                    )));
                }
                for &a in &self.alphas {
                    eta(a).map_err(|e| AmmError::validation(e.to_string()))?;
                }
            }
            CurveMode::Shifted if self.n != 2 => {
                return Err(AmmError::validation("the shifted ellipse is a two-token curve"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Circle radius `l·s` for a given liquidity scale.
    pub fn radius(&self, scale: FixedDecimal) -> Result<FixedDecimal> {
        self.l.mul(scale)
    }

    pub fn check_len(&self, reserves: &[FixedDecimal]) -> Result<()> {
        if reserves.len() != self.n {
            return Err(AmmError::Shape(format!(
                "expected {} reserves, got {}",
                self.n,
                reserves.len()
            )));
        }
        Ok(())
    }
}

/// Reserves and the liquidity scale the curve is currently drawn at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolState {
    pub reserves: Vec<FixedDecimal>,
    pub liquidity_scale: FixedDecimal,
}

impl PoolState {
    pub fn new(reserves: Vec<FixedDecimal>, liquidity_scale: FixedDecimal) -> Self {
        PoolState {
            reserves,
            liquidity_scale,
        }
    }

    pub fn validate(&self, params: &CurveParams) -> Result<()> {
        params.check_len(&self.reserves)?;
        if let Some(r) = self.reserves.iter().find(|r| r.is_negative()) {
            return Err(AmmError::validation(format!("negative reserve {r}")));
        }
        if !self.liquidity_scale.is_positive() {
            return Err(AmmError::validation(format!(
                "liquidity scale must be positive, got {}",
                self.liquidity_scale
            )));
        }
        Ok(())
    }

    /// A pool holding `reserve` of every token, with the scale solved so the
    /// state lies exactly on the curve.
    pub fn born_on_curve(params: &CurveParams, reserve: FixedDecimal) -> Result<Self> {
        params.validate()?;
        if !reserve.is_positive() {
            return Err(AmmError::validation(format!("initial reserve must be positive, got {reserve}")));
        }
        let reserves = vec![reserve; params.n];
        let scale = match params.mode {
            CurveMode::Ccmm => ccmm_equal_reserve_scale(params, reserve)?,
            CurveMode::Csemm if params.alphas.iter().all(|&a| a == params.alphas[0]) => {
                csemm_uniform_scale(params.alphas[0], params.n, reserve)?
            }
            _ => solve_scale(params, &reserves)?,
        };
        Ok(PoolState::new(reserves, scale))
    }
}

/// `η(α) = ln 2 / ln(α/(α−1))`, defined for `α > 1` and `α < 0`.
pub fn eta(alpha: FixedDecimal) -> Result<FixedDecimal> {
    if alpha >= FixedDecimal::ZERO && alpha <= FixedDecimal::ONE {
        return Err(AmmError::domain(format!(
            "eta is undefined for alpha = {alpha}; alpha must be > 1 or < 0"
        )));
    }
    let ratio = alpha.div(alpha.sub(FixedDecimal::ONE)?)?;
    FixedDecimal::TWO.ln()?.div(ratio.ln()?)
}

/// `Σ (x_i − l·s)² − (l·s)²`.
pub fn ccmm_residual(
    params: &CurveParams,
    reserves: &[FixedDecimal],
    scale: FixedDecimal,
) -> Result<FixedDecimal> {
    params.check_len(reserves)?;
    let r = params.radius(scale)?;
    let mut sum = FixedDecimal::ZERO;
    for &x in reserves {
        sum = sum.add(x.sub(r)?.square()?)?;
    }
    sum.sub(r.square()?)
}

/// `|x/(α·s) − 1|^η(α)`, one CSEMM summand.
pub(crate) fn csemm_term(alpha: FixedDecimal, scale: FixedDecimal, x: FixedDecimal) -> Result<FixedDecimal> {
    let u = x.div(alpha.mul(scale)?)?.sub(FixedDecimal::ONE)?;
    u.abs()?.pow(eta(alpha)?)
}

/// `Σ |x_i/(α_i·s) − 1|^η(α_i) − 1`.
pub fn csemm_residual(
    params: &CurveParams,
    reserves: &[FixedDecimal],
    scale: FixedDecimal,
) -> Result<FixedDecimal> {
    params.check_len(reserves)?;
    if params.alphas.len() != params.n {
        return Err(AmmError::Shape("alphas length differs from n".into()));
    }
    let mut sum = FixedDecimal::ZERO;
    for (&x, &a) in reserves.iter().zip(&params.alphas) {
        sum = sum.add(csemm_term(a, scale, x)?)?;
    }
    sum.sub(FixedDecimal::ONE)
}

/// `(l·s − x)^β + (l·s − y/c)^β − (l·s)^β` on the lower-left arc, where both
/// bases are non-negative. Points outside that arc are rejected.
pub fn shifted_ellipse_residual(
    params: &CurveParams,
    x: FixedDecimal,
    y: FixedDecimal,
    scale: FixedDecimal,
) -> Result<FixedDecimal> {
    let r = params.radius(scale)?;
    let (u, v) = shifted_offsets(params, r, x, y)?;
    u.pow(params.beta)?
        .add(v.pow(params.beta)?)?
        .sub(r.pow(params.beta)?)
}

/// Distances `(l·s − x, l·s − y/c)` from the ellipse centre, validated to lie
/// on the trading arc.
pub(crate) fn shifted_offsets(
    params: &CurveParams,
    r: FixedDecimal,
    x: FixedDecimal,
    y: FixedDecimal,
) -> Result<(FixedDecimal, FixedDecimal)> {
    if x.is_negative() || y.is_negative() {
        return Err(AmmError::domain("reserves must be non-negative"));
    }
    let u = r.sub(x)?;
    let v = r.sub(y.div(params.c)?)?;
    if u.is_negative() || v.is_negative() {
        return Err(AmmError::domain(format!(
            "({x}, {y}) lies outside the lower-left arc of the shifted ellipse"
        )));
    }
    Ok((u, v))
}

/// Centre curve `C(x) = 1 / (1 − (1 − ((x−1)/x)^β)^(1/β))` for `x > 1`.
///
/// A superellipse with centre and semi-axes `(x, C(x))` passes through
/// `(1, 1)` for every `x > 1`.
pub fn center_curve(x: FixedDecimal, beta: FixedDecimal) -> Result<FixedDecimal> {
    if x <= FixedDecimal::ONE {
        return Err(AmmError::domain(format!("center curve needs x > 1, got {x}")));
    }
    let ratio = x.sub(FixedDecimal::ONE)?.div(x)?;
    let inner = FixedDecimal::ONE.sub(ratio.pow(beta)?)?;
    let root = inner.pow(FixedDecimal::ONE.div(beta)?)?;
    FixedDecimal::ONE.div(FixedDecimal::ONE.sub(root)?)
}

/// Price-peak parameter `c` that makes the shifted ellipse with offset `l`
/// pass through `(1, 1)`: the centre `(l, c·l)` must sit on the centre curve.
pub fn peak_through_unit_point(l: FixedDecimal, beta: FixedDecimal) -> Result<FixedDecimal> {
    center_curve(l, beta)?.div(l)
}

/// Residual of whichever invariant `params` selects.
pub fn residual(params: &CurveParams, state: &PoolState) -> Result<FixedDecimal> {
    match params.mode {
        CurveMode::Ccmm => ccmm_residual(params, &state.reserves, state.liquidity_scale),
        CurveMode::Csemm => csemm_residual(params, &state.reserves, state.liquidity_scale),
        CurveMode::Shifted => {
            params.check_len(&state.reserves)?;
            shifted_ellipse_residual(
                params,
                state.reserves[0],
                state.reserves[1],
                state.liquidity_scale,
            )
        }
    }
}

pub fn is_on_curve(params: &CurveParams, state: &PoolState) -> Result<bool> {
    Ok(residual(params, state)?.abs()? <= ON_CURVE_TOLERANCE)
}

/// Gradient of the invariant function at the current reserves.
pub fn gradient(params: &CurveParams, state: &PoolState) -> Result<Vec<FixedDecimal>> {
    params.check_len(&state.reserves)?;
    let s = state.liquidity_scale;
    match params.mode {
        CurveMode::Ccmm => {
            let r = params.radius(s)?;
            state
                .reserves
                .iter()
                .map(|&x| x.sub(r)?.mul_int(2))
                .collect()
        }
        CurveMode::Csemm => state
            .reserves
            .iter()
            .zip(&params.alphas)
            .map(|(&x, &a)| {
                let scale = a.mul(s)?;
                let e = eta(a)?;
                let u = x.div(scale)?.sub(FixedDecimal::ONE)?;
                if u.is_zero() && e > FixedDecimal::ONE {
                    return Ok(FixedDecimal::ZERO);
                }
                let mag = u.abs()?.pow(e.sub(FixedDecimal::ONE)?)?;
                let signed = if u.is_negative() { mag.neg()? } else { mag };
                e.mul(signed)?.div(scale)
            })
            .collect(),
        CurveMode::Shifted => {
            let r = params.radius(s)?;
            let (u, v) = shifted_offsets(params, r, state.reserves[0], state.reserves[1])?;
            let b1 = params.beta.sub(FixedDecimal::ONE)?;
            // d/dx (r − x)^β = −β (r − x)^(β−1); the y term carries an extra 1/c
            let gx = params.beta.mul(u.pow(b1)?)?.neg()?;
            let gy = params.beta.mul(v.pow(b1)?)?.div(params.c)?.neg()?;
            Ok(vec![gx, gy])
        }
    }
}

/// `l·s = r (n + √n)/(n − 1)` solves `n (r − l·s)² = (l·s)²` on the lower branch.
fn ccmm_equal_reserve_scale(params: &CurveParams, reserve: FixedDecimal) -> Result<FixedDecimal> {
    let n = FixedDecimal::from_int(params.n as i64);
    let radius = reserve
        .mul(n.add(n.sqrt()?)?)?
        .div(n.sub(FixedDecimal::ONE)?)?;
    radius.div(params.l)
}

/// Uniform-α CSEMM: `n |r/(α s) − 1|^η = 1`.
fn csemm_uniform_scale(alpha: FixedDecimal, n: usize, reserve: FixedDecimal) -> Result<FixedDecimal> {
    let e = eta(alpha)?;
    let n = FixedDecimal::from_int(n as i64);
    // |u| = n^(-1/η)
    let mag = n.pow(FixedDecimal::ONE.div(e)?.neg()?)?;
    let abs_alpha = alpha.abs()?;
    if alpha.is_positive() {
        // lower branch: u = r/(α s) − 1 < 0
        reserve.div(abs_alpha.mul(FixedDecimal::ONE.sub(mag)?)?)
    } else {
        reserve.div(abs_alpha.mul(mag.sub(FixedDecimal::ONE)?)?)
    }
}

/// Bisection on the liquidity scale for the modes without a closed form.
/// The residual at fixed reserves increases monotonically with the scale.
fn solve_scale(params: &CurveParams, reserves: &[FixedDecimal]) -> Result<FixedDecimal> {
    let eval = |s: FixedDecimal| residual(params, &PoolState::new(reserves.to_vec(), s));
    let max_reserve = reserves.iter().copied().fold(FixedDecimal::ZERO, FixedDecimal::max);
    let mut lo = match params.mode {
        CurveMode::Shifted => max_reserve.max(max_reserve.div(params.c)?).div(params.l)?,
        _ => params
            .alphas
            .iter()
            .filter(|a| a.is_positive())
            .map(|&a| max_reserve.div(a))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(fd("0.000000001"), FixedDecimal::max),
    };
    if eval(lo)?.is_positive() {
        return Err(AmmError::Numeric("no on-curve scale below the reserve bound".into()));
    }
    let mut hi = lo.mul_int(2)?;
    let mut guard = 0;
    while !eval(hi)?.is_positive() {
        lo = hi;
        hi = hi.mul_int(2)?;
        guard += 1;
        if guard > 200 {
            return Err(AmmError::Numeric("could not bracket the liquidity scale".into()));
        }
    }
    while hi.sub(lo)? > FixedDecimal::ULP {
        let mid = FixedDecimal::from_raw(lo.raw() + (hi.raw() - lo.raw()) / 2);
        if eval(mid)?.is_positive() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (rl, rh) = (eval(lo)?.abs()?, eval(hi)?.abs()?);
    Ok(if rl <= rh { lo } else { hi })
}
