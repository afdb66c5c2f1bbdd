mod common;

use common::{brute_liquidity, f, from_f64, tol};
use ethnum::I256;
use polar_amm::fingerprint::{self as fp, FingerprintMode, FingerprintParams};
use polar_amm::hedge::{hedge_bands, hedge_payoff, position_value, HedgeSpec};
use polar_amm::invariant::{
    ccmm_residual, csemm_residual, default_l, peak_through_unit_point, residual, shifted_ellipse_residual,
};
use polar_amm::polar::{angle_to_price, cartesian_to_polar, polar_swap, price_to_angle};
use polar_amm::swap_cartesian::{ccmm_y_of_x, commit, spot_price, swap_exact_in, swap_exact_out};
use polar_amm::ticks::{swap_across_ticks, LpPosition, TickGrid, TickLedger};
use polar_amm::{fd, CurveParams, FixedDecimal, PoolState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dec(lo: i128, hi: i128) -> impl Strategy<Value = FixedDecimal> {
    (lo..=hi).prop_map(FixedDecimal::from_raw)
}

const E18: i128 = 1_000_000_000_000_000_000;

// numerics

#[test]
fn sqrt_squares_back_over_a_million_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ulp = I256::new(1);
    for _ in 0..1_000_000 {
        let a = rng.gen_range(0..=1_000_000 * E18);
        let r = FixedDecimal::from_raw(a).sqrt().unwrap().raw();
        // r² at scale 10^36 against a at the same scale; one ulp of r moves
        // r² by about 2r, so correct rounding bounds the gap by r + ½ ulp
        let gap = (I256::new(r) * I256::new(r) - I256::new(a) * I256::new(E18)).abs();
        let bound = (I256::new(r).max(I256::new(E18)) * 2) * ulp;
        assert!(gap <= bound, "sqrt({a}) = {r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn sqrt_is_monotone(a in dec(0, 1_000_000 * E18), d in dec(1, E18)) {
        let b = a.add(d).unwrap();
        prop_assert!(a.sqrt().unwrap() <= b.sqrt().unwrap());
    }

    #[test]
    fn pow_round_trips(x in dec(E18 / 10, 10 * E18), p in dec(E18 / 2, 4 * E18)) {
        let y = x.pow(p).unwrap().pow(FixedDecimal::ONE.div(p).unwrap()).unwrap();
        prop_assert!(y.abs_diff(x) <= x.mul(tol("0.000000000001")).unwrap().max(FixedDecimal::ULP));
    }

    #[test]
    fn exp_inverts_ln(x in dec(E18 / 1_000_000, 1_000_000 * E18)) {
        let y = x.ln().unwrap().exp().unwrap();
        prop_assert!(f(y.abs_diff(x)) <= f(x) * 1e-12 + 1e-18, "{x} -> {y}");
    }

    #[test]
    fn sin_cos_unit_circle(theta in dec(-7 * E18, 7 * E18)) {
        let (s, c) = (theta.sin().unwrap(), theta.cos().unwrap());
        let one = s.square().unwrap().add(c.square().unwrap()).unwrap();
        prop_assert!(one.abs_diff(FixedDecimal::ONE) <= FixedDecimal::from_raw(4));
    }

    #[test]
    fn transcendentals_track_f64(x in dec(E18 / 100, 100 * E18)) {
        let v = f(x);
        for (got, want) in [(x.ln().unwrap(), v.ln()), (x.sqrt().unwrap(), v.sqrt()), (x.sin().unwrap(), v.sin())] {
            prop_assert!((f(got) - want).abs() <= 1e-13 * want.abs().max(1.0));
        }
    }
}

#[test]
fn fixed_point_oracles() {
    assert_eq!(fd("2").sqrt().unwrap(), fd("1.414213562373095049"));
    assert_eq!(fd("2").pow(fd("0.5")).unwrap(), fd("1.414213562373095049"));
    assert_eq!(fd("3").pow(fd("-1")).unwrap(), fd("0.333333333333333333"));
    let three_quarter_pi = FixedDecimal::PI.mul_int(3).unwrap().div_int(4).unwrap();
    assert!(three_quarter_pi.cos().unwrap().abs_diff(fd("-0.707106781186547524")) <= FixedDecimal::from_raw(2));
    assert!(FixedDecimal::from_int(10_000_000_000).mul(FixedDecimal::from_int(10_000_000_000)).is_ok());
    let big = fd("10000000000000000000");
    assert!(big.mul(big).is_err());
    assert!(FixedDecimal::ONE.div(FixedDecimal::ZERO).is_err());
}

// invariant

#[test]
fn superellipse_at_l_is_the_circle() {
    let circle = CurveParams::ccmm(2).unwrap();
    let superellipse = CurveParams::csemm(vec![default_l(); 2]).unwrap();
    let r = circle.radius(FixedDecimal::ONE).unwrap();
    for k in 0..1000 {
        let x = r.mul_int(k).unwrap().div_int(1000).unwrap();
        let y = ccmm_y_of_x(&circle, x, FixedDecimal::ONE).unwrap();
        let a = ccmm_residual(&circle, &[x, y], FixedDecimal::ONE).unwrap();
        let b = csemm_residual(&superellipse, &[x, y], FixedDecimal::ONE).unwrap();
        assert!(a.abs().unwrap() <= tol("0.000000000001"));
        assert!(b.abs().unwrap() <= tol("0.000000000001"), "x = {x}: {b}");
    }
}

#[test]
fn shifted_ellipses_pass_through_unit_point() {
    let l = default_l();
    for k in 1..=20 {
        let beta = FixedDecimal::ONE.add(FixedDecimal::from_ratio(k, 20).unwrap()).unwrap();
        let c = peak_through_unit_point(l, beta).unwrap();
        let params = CurveParams::shifted(beta, c).unwrap();
        let r = shifted_ellipse_residual(&params, FixedDecimal::ONE, FixedDecimal::ONE, FixedDecimal::ONE).unwrap();
        assert!(r.abs().unwrap() <= tol("0.000000000001"), "beta {beta}: {r}");
    }
}

#[test]
fn pools_are_born_on_curve() {
    for n in 2..=8 {
        let params = CurveParams::ccmm(n).unwrap();
        for reserve in ["0.5", "1", "37.25"] {
            let state = PoolState::born_on_curve(&params, fd(reserve)).unwrap();
            assert!(residual(&params, &state).unwrap().abs().unwrap() <= tol("0.000000001"));
        }
    }
    let params = CurveParams::csemm(vec![fd("3"), fd("5"), fd("-2")]).unwrap();
    let state = PoolState::born_on_curve(&params, FixedDecimal::ONE).unwrap();
    assert!(residual(&params, &state).unwrap().abs().unwrap() <= tol("0.000000001"));
}

// Cartesian swaps

fn circle_pool() -> (CurveParams, PoolState) {
    let params = CurveParams::ccmm(2).unwrap();
    let state = PoolState::born_on_curve(&params, FixedDecimal::ONE).unwrap();
    (params, state)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn swaps_conserve_the_invariant(
        n in 2usize..=5,
        trades in prop::collection::vec((0usize..5, 1usize..5, 1i64..=100_000), 1..20),
    ) {
        let params = CurveParams::ccmm(n).unwrap();
        let mut state = PoolState::born_on_curve(&params, FixedDecimal::ONE).unwrap();
        for (i, shift, size) in trades {
            let (i, j) = (i % n, (i % n + shift % (n - 1) + 1) % n);
            let amount = state.reserves[i].mul(FixedDecimal::from_ratio(size, 1_000_000).unwrap()).unwrap();
            let before = residual(&params, &state).unwrap();
            if let Ok(q) = swap_exact_in(&params, &state, i, j, amount) {
                commit(&mut state, &q).unwrap();
                let after = residual(&params, &state).unwrap();
                prop_assert!(after.abs_diff(before) <= tol("0.000000001"));
            }
        }
    }

    #[test]
    fn ccmm_y_is_an_involution(x in dec(0, 3_414_213_562_373_095_048)) {
        let params = CurveParams::ccmm(2).unwrap();
        let y = ccmm_y_of_x(&params, x, FixedDecimal::ONE).unwrap();
        let back = ccmm_y_of_x(&params, y, FixedDecimal::ONE).unwrap();
        prop_assert!(back.abs_diff(x) <= tol("0.000000000001"));
    }

    #[test]
    fn exact_out_inverts_exact_in(amount in dec(E18 / 1000, 2 * E18)) {
        let (params, state) = circle_pool();
        let q = swap_exact_in(&params, &state, 0, 1, amount).unwrap();
        let back = swap_exact_out(&params, &state, 0, 1, q.amount_out).unwrap();
        prop_assert!(back.amount_in.abs_diff(amount) <= tol("0.000000001"));
    }

    #[test]
    fn polar_route_matches_cartesian(amount in dec(E18 / 1000, 2 * E18), token in 0usize..2) {
        let (params, state) = circle_pool();
        let c = swap_exact_in(&params, &state, token, 1 - token, amount).unwrap();
        let p = polar_swap(&params, &state, token, 1 - token, amount, false).unwrap();
        prop_assert!(c.amount_out.abs_diff(p.amount_out) <= tol("0.000000001"));
        let r0 = cartesian_to_polar(&params, state.reserves[0], state.reserves[1], FixedDecimal::ONE).unwrap();
        let r1 = cartesian_to_polar(&params, p.new_reserves[0], p.new_reserves[1], FixedDecimal::ONE).unwrap();
        prop_assert!(r0.radius.abs_diff(r1.radius) <= tol("0.000000001"));
    }

    #[test]
    fn price_angle_round_trip(p in dec(E18 / 1000, 1000 * E18)) {
        let back = angle_to_price(price_to_angle(p).unwrap()).unwrap();
        prop_assert!(back.abs_diff(p) <= tol("0.000000000001").max(p.mul(tol("0.000000000000001")).unwrap()));
    }
}

#[test]
fn output_is_increasing_and_concave() {
    let (params, state) = circle_pool();
    let outs: Vec<FixedDecimal> = (1..=1000)
        .map(|k| swap_exact_in(&params, &state, 0, 1, FixedDecimal::from_ratio(k * 24, 10_000).unwrap()).unwrap().amount_out)
        .collect();
    for w in outs.windows(3) {
        assert!(w[1] > w[0]);
        let second = w[2].sub(w[1].mul_int(2).unwrap()).unwrap().add(w[0]).unwrap();
        assert!(second <= FixedDecimal::from_raw(10));
    }
}

#[test]
fn marginal_price_matches_gradient() {
    let params = CurveParams::ccmm(3).unwrap();
    let mut state = PoolState::born_on_curve(&params, FixedDecimal::ONE).unwrap();
    let q = swap_exact_in(&params, &state, 0, 1, fd("0.4")).unwrap();
    commit(&mut state, &q).unwrap();
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        let spot = spot_price(&params, &state, i, j).unwrap();
        let tiny = swap_exact_in(&params, &state, i, j, fd("0.000000001")).unwrap();
        let ratio = tiny.amount_out.div(tiny.amount_in).unwrap();
        assert!(ratio.abs_diff(spot) <= tol("0.000001"), "{i}->{j}: {ratio} vs {spot}");
    }
}

// ticks

#[derive(Debug, Clone)]
enum Op {
    Add(u32, u32, i64),
    Remove(usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0u32..90, 1u32..=90, 1i64..1_000_000).prop_map(|(a, w, l)| Op::Add(a, (a + w).min(90), l)),
        (0usize..64).prop_map(Op::Remove),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ledger_matches_brute_force(ops in prop::collection::vec(op(), 1..80), probes in prop::collection::vec(0i128..=90 * E18, 50)) {
        let mut ledger = TickLedger::new(TickGrid::default());
        let mut ids = Vec::new();
        for op in ops {
            match op {
                Op::Add(lo, hi, l) if lo < hi => {
                    let id = ledger.next_id();
                    let pos = LpPosition::new(id, FixedDecimal::from_int(lo as i64), FixedDecimal::from_int(hi as i64), FixedDecimal::from_ratio(l, 1000).unwrap());
                    ledger.add_position(pos).unwrap();
                    ids.push(id);
                }
                Op::Remove(k) if !ids.is_empty() => {
                    let id = ids.swap_remove(k % ids.len());
                    ledger.remove_position(id).unwrap();
                }
                _ => {}
            }
        }
        for raw in probes.into_iter().chain((0..=90).map(|d| d * E18)) {
            let angle = FixedDecimal::from_raw(raw);
            prop_assert_eq!(ledger.active_liquidity(angle).unwrap(), brute_liquidity(&ledger, angle));
        }
    }

    #[test]
    fn tick_segments_add_up(amount in dec(E18 / 100, 12 * E18), token in 0usize..2) {
        let params = CurveParams::ccmm(2).unwrap();
        let mut ledger = TickLedger::new(TickGrid::default());
        ledger.add_position(LpPosition::new(1, fd("0"), fd("90"), fd("5"))).unwrap();
        ledger.add_position(LpPosition::new(2, fd("40"), fd("55"), fd("3"))).unwrap();
        let u = polar_amm::ticks::unit_reserves(&params, fd("45")).unwrap();
        let state = PoolState::new(vec![u[0].mul_int(8).unwrap(), u[1].mul_int(8).unwrap()], fd("8"));
        let swap = swap_across_ticks(&params, &ledger, &state, token, amount).unwrap();
        let sum_in = swap.segments.iter().fold(FixedDecimal::ZERO, |a, s| a.add(s.delta_in).unwrap());
        let sum_out = swap.segments.iter().fold(FixedDecimal::ZERO, |a, s| a.add(s.delta_out).unwrap());
        prop_assert_eq!(sum_in, swap.quote.amount_in);
        prop_assert_eq!(sum_out, swap.quote.amount_out);
        for s in &swap.segments {
            let mid = s.angle_from.add(s.angle_to).unwrap().div_int(2).unwrap();
            prop_assert_eq!(s.liquidity, ledger.active_liquidity(mid).unwrap());
        }
    }
}

#[test]
fn liquidity_only_changes_at_boundaries() {
    let mut ledger = TickLedger::new(TickGrid::default());
    ledger.add_position(LpPosition::new(1, fd("10"), fd("70"), fd("2"))).unwrap();
    ledger.add_position(LpPosition::new(2, fd("33"), fd("34"), fd("5"))).unwrap();
    for k in 0..90 {
        let base = ledger.active_liquidity(FixedDecimal::from_int(k)).unwrap();
        for frac in ["0.001", "0.5", "0.999999999999999999"] {
            let a = FixedDecimal::from_int(k).add(fd(frac)).unwrap();
            assert_eq!(ledger.active_liquidity(a).unwrap(), base);
        }
    }
}

// fingerprints and payoffs

#[test]
fn fingerprints_are_positive_and_integrable() {
    let modes = [FingerprintMode::Ccmm, FingerprintMode::Cemm, FingerprintMode::Csemm];
    for mode in modes {
        let mut params = FingerprintParams::new(mode);
        params.c = fd("1.7");
        params.alpha = fd("4");
        let mut area = 0.0;
        let mut prev = None;
        for k in 0..=400 {
            let t = fd("-10").add(FixedDecimal::from_ratio(k, 20).unwrap()).unwrap();
            let v = fp::fingerprint(&params, t).unwrap();
            assert!(v.is_positive(), "{mode:?} at {t}");
            if let Some(p) = prev {
                area += 0.025 * (f(p) + f(v));
            }
            prev = Some(v);
        }
        assert!(area.is_finite() && area > 0.0);
    }
}

#[test]
fn csemm_fingerprint_high_precision_oracle() {
    let mut params = FingerprintParams::new(FingerprintMode::Csemm);
    params.alpha = fd("4");
    let v = fp::fingerprint_csemm(&params, FixedDecimal::ZERO).unwrap();
    // 2α/(η−1) · 2^{−(η+1)/η} at α = 4, η = ln 2 / ln(4/3)
    assert!(v.abs_diff(fd("2.128533874054364331")) <= tol("0.000000000000001"), "{v}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn payoff_is_a_lower_bound(p in dec(E18 / 10, 10 * E18), theta in 0.0f64..std::f64::consts::FRAC_PI_2) {
        let params = FingerprintParams::new(FingerprintMode::Ccmm);
        let l = f(params.l);
        let (x, y) = (l * (1.0 - theta.cos()), l * (1.0 - theta.sin()));
        let v = fp::lp_payoff(&params, p).unwrap();
        prop_assert!(f(v) <= f(p) * x + y + 1e-12);
    }
}

#[test]
fn payoff_oracles() {
    let params = FingerprintParams::new(FingerprintMode::Ccmm);
    let v = fp::lp_payoff(&params, FixedDecimal::ONE).unwrap();
    assert!(v.abs_diff(FixedDecimal::TWO) <= tol("0.000000000001"));
    // brute-force scan of the arc
    let l = f(params.l);
    let scan = (0..=100_000)
        .map(|k| {
            let th = std::f64::consts::FRAC_PI_2 * k as f64 / 100_000.0;
            l * (1.0 - th.cos()) + l * (1.0 - th.sin())
        })
        .fold(f64::INFINITY, f64::min);
    assert!((scan - 2.0).abs() < 1e-9);
    let vals: Vec<FixedDecimal> = (1..=100)
        .map(|k| fp::lp_payoff(&params, FixedDecimal::from_ratio(k, 10).unwrap()).unwrap())
        .collect();
    for w in vals.windows(3) {
        let second = w[2].sub(w[1].mul_int(2).unwrap()).unwrap().add(w[0]).unwrap();
        assert!(second <= tol("0.000000001"));
    }
}

// hedge

fn hedge_grid(n: i64) -> Vec<FixedDecimal> {
    (0..=n).map(|k| fd("0.8").add(FixedDecimal::from_ratio(k * 3, n * 10).unwrap()).unwrap()).collect()
}

fn transition(spec: &HedgeSpec) -> f64 {
    let curve = hedge_payoff(&CurveParams::ccmm(2).unwrap(), spec, &hedge_grid(3000)).unwrap();
    let inside: Vec<f64> = curve
        .samples
        .iter()
        .filter(|(_, v)| *v > tol("0.000000001") && *v < fd("0.999999999"))
        .map(|(p, _)| f(*p))
        .collect();
    inside.last().unwrap() - inside.first().unwrap()
}

#[test]
fn hedge_transition_narrows_with_width() {
    let mut spec = HedgeSpec::new(fd("0.95"), fd("1"));
    let mut widths = Vec::new();
    for w in ["2", "1", "0.5"] {
        spec.width_deg = fd(w);
        widths.push(transition(&spec));
    }
    assert!(widths[0] > widths[1] && widths[1] > widths[2], "{widths:?}");
}

#[test]
fn hedge_curvature_signs() {
    let params = CurveParams::ccmm(2).unwrap();
    let spec = HedgeSpec::new(fd("0.95"), fd("1"));
    let (long, short) = hedge_bands(&params, &TickGrid::default(), &spec, (1, 2)).unwrap();
    let second = |g: &dyn Fn(FixedDecimal) -> FixedDecimal, a: f64, b: f64| {
        (1..20)
            .map(|k| {
                let p = a + (b - a) * k as f64 / 20.0;
                let h = (b - a) / 200.0;
                let v = |x: f64| f(g(from_f64(x)));
                v(p + h) - 2.0 * v(p) + v(p - h)
            })
            .collect::<Vec<_>>()
    };
    let band = |pos: &LpPosition| (f(angle_to_price(pos.upper_deg()).unwrap()), f(angle_to_price(pos.lower_deg()).unwrap()));
    // the long band alone is concave inside its range
    let (a, b) = band(&long);
    let long_value = |p| position_value(&params, &long, p).unwrap();
    assert!(second(&long_value, a, b).iter().all(|d| *d <= 1e-12));
    // inside the short band the long is flat, so the pair is convex there
    let (a, b) = band(&short);
    let combined = |p| position_value(&params, &long, p).unwrap().add(position_value(&params, &short, p).unwrap()).unwrap();
    assert!(second(&combined, a, b).iter().all(|d| *d >= -1e-12));
}
