//! Shared oracles for the integration tests. Everything here is deliberately
//! independent of the engine: f64 arithmetic and brute-force loops.

#![allow(dead_code)]

use polar_amm::pool::Trade;
use polar_amm::ticks::TickLedger;
use polar_amm::{AmmError, FixedDecimal, PoolFile};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn f(x: FixedDecimal) -> f64 {
    x.to_string().parse().unwrap()
}

/// Nearest FixedDecimal to an f64, via its decimal expansion.
pub fn from_f64(x: f64) -> FixedDecimal {
    format!("{x:.18}").parse().unwrap()
}

pub fn tol(x: &str) -> FixedDecimal {
    x.parse().unwrap()
}

/// Liquidity covering `angle`, summed position by position. Bands are
/// half-open `[lower, upper)` except that 90° belongs to bands ending there.
pub fn brute_liquidity(ledger: &TickLedger, angle: FixedDecimal) -> FixedDecimal {
    let ninety = FixedDecimal::from_int(90);
    ledger
        .positions()
        .filter(|p| {
            (p.lower_deg() <= angle && angle < p.upper_deg()) || (angle == ninety && p.upper_deg() == ninety)
        })
        .fold(FixedDecimal::ZERO, |acc, p| acc.add(p.signed_liquidity()).unwrap())
}

/// Piecewise-constant liquidity as plain floats: `(lower, upper, liquidity)`.
pub type Bands = Vec<(f64, f64, f64)>;

fn band_liquidity(bands: &Bands, angle: f64) -> f64 {
    bands.iter().filter(|b| b.0 <= angle && angle < b.1).map(|b| b.2).sum()
}

/// Integrates a two-token tick swap over tick angle with the midpoint rule
/// on a global grid of `step` degrees. With `p = 90/φ − 1` the unit reserves
/// are `l(1 − p/√(1+p²))` and `l(1 − 1/√(1+p²))`, so
/// `dx/dφ = 90 l / (φ² (1+p²)^{3/2})` and `dy/dφ = −p·dx/dφ`.
/// Returns `(amount_out, end_angle)`.
pub fn integrate_tick_swap(bands: &Bands, l: f64, start_deg: f64, token_in: usize, amount_in: f64, step: f64) -> (f64, f64) {
    let up = token_in == 0;
    let (mut phi, mut paid, mut got) = (start_deg, 0.0, 0.0);
    loop {
        let cell = phi / step;
        let next = if up {
            ((cell + 1e-9).floor() + 1.0) * step
        } else {
            ((cell - 1e-9).ceil() - 1.0) * step
        };
        assert!((0.0..=90.0).contains(&next), "ran off the quadrant at {phi}");
        let mid = 0.5 * (phi + next);
        let liq = band_liquidity(bands, mid);
        let p = 90.0 / mid - 1.0;
        let dx = liq * 90.0 * l / (mid * mid * (1.0 + p * p).powf(1.5)) * (next - phi).abs();
        let (din, dout) = if up { (dx, p * dx) } else { (p * dx, dx) };
        if paid + din >= amount_in {
            let frac = (amount_in - paid) / din;
            got += dout * frac;
            phi += (next - phi) * frac;
            return (got, phi);
        }
        paid += din;
        got += dout;
        phi = next;
    }
}

/// Draws `count` trades, each feasible from the state left by the previous
/// ones, sized up to 5% of the input reserve.
pub fn feasible_trades(pool: &PoolFile, count: usize, rng: &mut ChaCha8Rng) -> Vec<Trade> {
    let mut pool = pool.clone();
    let route = pool.default_route();
    let n = pool.params.n;
    let mut trades = Vec::with_capacity(count);
    while trades.len() < count {
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let frac = FixedDecimal::from_ratio(rng.gen_range(1..=1_000_000), 20_000_000).unwrap();
        let amount = pool.state.reserves[i].mul(frac).unwrap();
        match pool.swap(i, j, amount, false, route) {
            Ok(_) => trades.push(Trade {
                seq: trades.len() as u64 + 1,
                token_in: i,
                token_out: j,
                amount_in: amount,
            }),
            Err(AmmError::InsufficientLiquidity { .. }) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    trades
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}
