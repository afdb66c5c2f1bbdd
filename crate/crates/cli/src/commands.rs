use std::path::Path;

use polar_amm::fingerprint::{self as fp, FingerprintMode, FingerprintParams};
use polar_amm::hedge::{build_hedge, hedge_payoff, HedgeSpec};
use polar_amm::invariant::{default_l, peak_through_unit_point, residual};
use polar_amm::pool::{replay as replay_trades, Trade};
use polar_amm::swap_cartesian::solve_partner;
use polar_amm::ticks::{reanchor, TickGrid};
use polar_amm::{AmmError, CurveMode, CurveParams, FixedDecimal, PoolFile, Route, SwapQuote};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliError;
use crate::io;
use crate::{
    AddPositionArgs, CurveArgs, FingerprintArgs, GenTradesArgs, HedgeArgs, InitArgs, PayoffArgs, RemovePositionArgs,
    ReplayArgs, TradeArgs,
};

/// `points` evenly spaced values from `lo` to `hi` inclusive.
fn linspace(lo: FixedDecimal, hi: FixedDecimal, points: usize) -> Result<Vec<FixedDecimal>, CliError> {
    if points < 2 {
        return Err(AmmError::Validation("need at least 2 points".into()).into());
    }
    if lo >= hi {
        return Err(AmmError::Validation(format!("empty range [{lo}, {hi}]")).into());
    }
    let span = hi.sub(lo)?;
    let last = (points - 1) as i64;
    (0..=last)
        .map(|k| Ok(lo.add(span.mul_int(k)?.div_int(last)?)?))
        .collect()
}

fn curve_params(a: &InitArgs) -> Result<CurveParams, CliError> {
    let mut params = match a.mode {
        CurveMode::Ccmm => CurveParams::ccmm(a.n)?,
        CurveMode::Csemm => {
            let alphas = match a.alpha.as_slice() {
                [] => vec![default_l(); a.n],
                [one] => vec![*one; a.n],
                many => many.to_vec(),
            };
            if alphas.len() != a.n {
                return Err(AmmError::Shape(format!("{} alphas given for n = {}", alphas.len(), a.n)).into());
            }
            CurveParams::csemm(alphas)?
        }
        CurveMode::Shifted => {
            if a.n != 2 {
                return Err(AmmError::Shape("the shifted ellipse is a two-token curve".into()).into());
            }
            let l = a.l.unwrap_or_else(default_l);
            let c = match a.c {
                Some(c) => c,
                None => peak_through_unit_point(l, a.beta)?,
            };
            CurveParams::shifted(a.beta, c)?
        }
    };
    if let Some(l) = a.l {
        params.l = l;
        if params.mode == CurveMode::Ccmm {
            params.alphas = vec![l; a.n];
        }
    }
    params.validate()?;
    Ok(params)
}

pub fn init(a: InitArgs) -> Result<(), CliError> {
    let params = curve_params(&a)?;
    let pool = PoolFile::init(params, a.reserve, TickGrid::new(a.tick_spacing)?)?;
    io::write_pool(&a.pool, &pool)?;
    eprintln!("residual {}", residual(&pool.params, &pool.state)?);
    io::print_json(&pool)
}

#[derive(Serialize)]
struct TradeReport<'a> {
    route: Route,
    quote: &'a SwapQuote,
    /// Output gap to the Cartesian route, for polar quotes.
    #[serde(skip_serializing_if = "Option::is_none")]
    cartesian_diff: Option<FixedDecimal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<String>,
}

pub fn trade(a: TradeArgs, execute: bool) -> Result<(), CliError> {
    let mut pool = io::read_pool(&a.pool)?;
    let route = a.route.unwrap_or_else(|| pool.default_route());
    let cartesian_diff = if route == Route::Polar {
        let c = pool.quote(a.token_in, a.token_out, a.amount, a.exact_out, Route::Cartesian)?;
        let p = pool.quote(a.token_in, a.token_out, a.amount, a.exact_out, Route::Polar)?;
        let (cv, pv) = if a.exact_out {
            (c.quote.amount_in, p.quote.amount_in)
        } else {
            (c.quote.amount_out, p.quote.amount_out)
        };
        Some(cv.abs_diff(pv))
    } else {
        None
    };
    let routed = if execute {
        pool.swap(a.token_in, a.token_out, a.amount, a.exact_out, route)?
    } else {
        pool.quote(a.token_in, a.token_out, a.amount, a.exact_out, route)?
    };
    let trace = match (&a.trace, &routed.segments) {
        (Some(path), Some(segments)) => {
            io::write_segments(path, segments)?;
            Some(path.display().to_string())
        }
        (Some(_), None) => {
            return Err(AmmError::Validation("--trace needs the ticks route".into()).into());
        }
        _ => None,
    };
    if execute {
        io::write_pool(&a.pool, &pool)?;
    }
    io::print_json(&TradeReport {
        route,
        quote: &routed.quote,
        cartesian_diff,
        trace,
    })
}

#[derive(Serialize)]
struct PositionReport<'a> {
    id: u64,
    pool: &'a PoolFile,
}

pub fn add_position(a: AddPositionArgs) -> Result<(), CliError> {
    let mut pool = io::read_pool(&a.pool)?;
    let id = pool.add_position(a.lower, a.upper, a.liquidity)?;
    io::write_pool(&a.pool, &pool)?;
    io::print_json(&PositionReport { id, pool: &pool })
}

pub fn remove_position(a: RemovePositionArgs) -> Result<(), CliError> {
    let mut pool = io::read_pool(&a.pool)?;
    pool.remove_position(a.id)?;
    io::write_pool(&a.pool, &pool)?;
    io::print_json(&PositionReport { id: a.id, pool: &pool })
}

pub fn replay(a: ReplayArgs) -> Result<(), CliError> {
    let mut pool = io::read_pool(&a.pool)?;
    let trades = io::read_trades(&a.trades)?;
    let summary = replay_trades(&mut pool, &trades)?;
    if let Some(path) = &a.outputs {
        io::write_outputs(path, &summary.outputs)?;
    }
    if a.write {
        io::write_pool(&a.pool, &pool)?;
    }
    io::print_json(&summary)
}

/// Draws trades that each fit the pool state left by the previous ones.
pub fn gen_trades(a: GenTradesArgs, seed: u64) -> Result<(), CliError> {
    let mut pool = io::read_pool(&a.pool)?;
    if !a.max_fraction.is_positive() || a.max_fraction > FixedDecimal::ONE {
        return Err(AmmError::Validation("--max-fraction must lie in (0, 1]".into()).into());
    }
    let n = pool.params.n;
    let route = pool.default_route();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trades = Vec::with_capacity(a.count);
    let mut attempts = 0usize;
    while trades.len() < a.count {
        attempts += 1;
        if attempts > a.count * 20 + 100 {
            return Err(AmmError::Numeric(format!("only {} feasible trades found", trades.len())).into());
        }
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let micros = rng.gen_range(1..=1_000_000i64);
        let amount = pool.state.reserves[i]
            .mul(a.max_fraction)?
            .mul(FixedDecimal::from_ratio(micros, 1_000_000)?)?;
        match pool.swap(i, j, amount, false, route) {
            Ok(_) => trades.push(Trade {
                seq: trades.len() as u64 + 1,
                token_in: i,
                token_out: j,
                amount_in: amount,
            }),
            Err(AmmError::InsufficientLiquidity { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    eprintln!("{} trades, seed {seed}", trades.len());
    io::write_trades(a.out.as_deref(), &trades)
}

/// Feasible range of token `i`'s reserve along the pair's curve, clipped to
/// [r/100, 100r] around its current reserve `r`.
fn curve_extent(pool: &PoolFile, i: usize, j: usize) -> Result<(FixedDecimal, FixedDecimal), CliError> {
    let feasible = |x: FixedDecimal| solve_partner(&pool.params, &pool.state, i, j, x).is_ok();
    let r = pool.state.reserves[i];
    let floor = if feasible(FixedDecimal::ZERO) {
        FixedDecimal::ZERO
    } else {
        r.div_int(100)?
    };
    let cap = r.mul_int(100)?;
    let lo = if feasible(floor) { floor } else { edge(&feasible, r, floor)? };
    let hi = if feasible(cap) { cap } else { edge(&feasible, r, cap)? };
    Ok((lo, hi))
}

/// Last feasible point between a feasible `inside` and an infeasible `outside`.
fn edge(
    feasible: &impl Fn(FixedDecimal) -> bool,
    mut inside: FixedDecimal,
    mut outside: FixedDecimal,
) -> Result<FixedDecimal, CliError> {
    for _ in 0..128 {
        let mid = inside.add(outside)?.div_int(2)?;
        if mid == inside || mid == outside {
            break;
        }
        if feasible(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(inside)
}

pub fn curve(a: CurveArgs) -> Result<(), CliError> {
    let pool = io::read_pool(&a.pool)?;
    let (i, j) = (a.token_x, a.token_y);
    if i == j || i >= pool.params.n || j >= pool.params.n {
        return Err(AmmError::Shape(format!("bad token pair ({i}, {j})")).into());
    }
    let (lo, hi) = curve_extent(&pool, i, j)?;
    let mut rows = Vec::with_capacity(a.points);
    for x in linspace(lo, hi, a.points)? {
        rows.push((x, solve_partner(&pool.params, &pool.state, i, j, x)?));
    }
    io::print_columns(["x", "y"], &rows)
}

pub fn fingerprint(a: FingerprintArgs) -> Result<(), CliError> {
    let mut params = FingerprintParams::new(a.mode);
    if let Some(l) = a.l {
        params.l = l;
    }
    if let Some(alpha) = a.alpha {
        params.alpha = alpha;
    }
    params.c = a.c;
    params.s_x = a.s_x;
    params.s_y = a.s_y;
    params.big_l = a.big_l;
    params.alpha_mm = a.alpha_mm;
    params.validate()?;

    if a.mode == FingerprintMode::Multimodal {
        eprintln!("modality_count {}", fp::modality_count(&params)?);
        let two_pi = FixedDecimal::PI.mul_int(2)?;
        let last = (a.points.max(2) - 1) as i64;
        let rows = (0..=last)
            .map(|k| {
                let theta = two_pi.mul_int(k)?.div_int(last)?;
                Ok((theta, fp::multimodal_radius(&params, theta)?))
            })
            .collect::<Result<Vec<_>, AmmError>>()?;
        return io::print_columns(["theta", "radius"], &rows);
    }
    let rows = linspace(a.t_min, a.t_max, a.points)?
        .into_iter()
        .map(|t| Ok((t, fp::fingerprint(&params, t)?)))
        .collect::<Result<Vec<_>, AmmError>>()?;
    io::print_columns(["t", "value"], &rows)
}

pub fn payoff(a: PayoffArgs) -> Result<(), CliError> {
    let mut params = FingerprintParams::new(a.mode);
    if let Some(l) = a.l {
        params.l = l;
    }
    params.c = a.c;
    params.validate()?;
    let rows = linspace(a.p_min, a.p_max, a.points)?
        .into_iter()
        .map(|p| Ok((p, fp::lp_payoff(&params, p)?)))
        .collect::<Result<Vec<_>, AmmError>>()?;
    io::print_columns(["price", "value"], &rows)
}

pub fn hedge(a: HedgeArgs) -> Result<(), CliError> {
    let spec = HedgeSpec {
        strike_price: a.strike,
        width_deg: a.width,
        notional_liquidity: a.notional,
    };
    let prices = linspace(a.p_min, a.p_max, a.points)?;
    let params = match &a.pool {
        Some(path) => register_hedge(path, &spec)?,
        None => CurveParams::ccmm(2)?,
    };
    let curve = hedge_payoff(&params, &spec, &prices)?;
    io::print_columns(["price", "payoff"], &curve.samples)
}

fn register_hedge(path: &Path, spec: &HedgeSpec) -> Result<CurveParams, CliError> {
    let mut pool = io::read_pool(path)?;
    let params = pool.params.clone();
    let ledger = pool
        .ledger
        .as_mut()
        .ok_or_else(|| AmmError::Validation("hedge registration needs a pool with a ledger".into()))?;
    let before = ledger.clone();
    let (long, short) = build_hedge(&params, ledger, spec)?;
    match reanchor(&params, ledger, &pool.state) {
        Ok(state) => pool.state = state,
        Err(e) => {
            *ledger = before;
            return Err(e.into());
        }
    }
    io::write_pool(path, &pool)?;
    eprintln!(
        "registered long #{} [{}, {}] and short #{} [{}, {}]",
        long.id(),
        long.lower_deg(),
        long.upper_deg(),
        short.id(),
        short.lower_deg(),
        short.upper_deg()
    );
    Ok(params)
}
