//! Liquidity fingerprints and the LP value function.
//!
//! Fingerprints are densities of liquidity over tick space `t = ln p`. The
//! circle, ellipse and superellipse have closed forms; the multimodal curve
//! is a polar radius `r(θ)` with a sinusoidal ripple whose flat spots carry
//! the liquidity peaks.
//!
//! The LP value `V(p) = min (p·x + y)` over the trading arc is found by
//! golden-section search. Its curvature in `q = √p` gives the liquidity
//! density `½ (V_q − q·V_qq) = −2 p^{3/2} V''(p)`, which is the quantity the
//! closed forms describe.

use serde::{Deserialize, Serialize};

use crate::error::{AmmError, Result};
use crate::invariant::{default_l, eta};
use crate::numerics::FixedDecimal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FingerprintMode {
    Ccmm,
    Cemm,
    Csemm,
    Multimodal,
}

impl std::str::FromStr for FingerprintMode {
    type Err = AmmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ccmm" => Ok(FingerprintMode::Ccmm),
            "cemm" => Ok(FingerprintMode::Cemm),
            "csemm" => Ok(FingerprintMode::Csemm),
            "multimodal" => Ok(FingerprintMode::Multimodal),
            other => Err(AmmError::validation(format!("unknown fingerprint mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintParams {
    pub mode: FingerprintMode,
    pub l: FixedDecimal,
    /// Price peak of the ellipse.
    pub c: FixedDecimal,
    /// Superellipse α; η is derived from it.
    pub alpha: FixedDecimal,
    pub s_x: FixedDecimal,
    pub s_y: FixedDecimal,
    /// Base radius of the multimodal curve.
    pub big_l: FixedDecimal,
    /// Ripple frequency of the multimodal curve, even and at least 4.
    pub alpha_mm: u32,
}

impl FingerprintParams {
    pub fn new(mode: FingerprintMode) -> Self {
        let l = default_l();
        FingerprintParams {
            mode,
            l,
            c: FixedDecimal::ONE,
            alpha: l,
            s_x: FixedDecimal::ONE,
            s_y: FixedDecimal::ONE,
            big_l: FixedDecimal::ONE,
            alpha_mm: 4,
        }
    }

    pub fn multimodal(alpha_mm: u32) -> Result<Self> {
        let p = FingerprintParams {
            alpha_mm,
            ..FingerprintParams::new(FingerprintMode::Multimodal)
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.l.is_positive() || !self.c.is_positive() || !self.big_l.is_positive() {
            return Err(AmmError::validation("l, c and L must be positive"));
        }
        if !self.s_x.is_positive() || !self.s_y.is_positive() {
            return Err(AmmError::validation("s_x and s_y must be positive"));
        }
        if self.alpha_mm < 4 || !self.alpha_mm.is_multiple_of(2) {
            return Err(AmmError::validation(format!(
                "multimodal alpha must be an even integer ≥ 4, got {}",
                self.alpha_mm
            )));
        }
        if self.mode == FingerprintMode::Csemm {
            eta(self.alpha)?;
        }
        Ok(())
    }

    /// `β = α²` for the multimodal curve.
    pub fn beta_mm(&self) -> u32 {
        self.alpha_mm * self.alpha_mm
    }
}

fn fd_ratio(n: i64, d: i64) -> FixedDecimal {
    FixedDecimal::from_ratio(n, d).expect("small ratio")
}

/// `scale · exp(a·t − b·ln(c² + exp(k·t)))`, the shape shared by all three
/// closed forms, evaluated in log space to keep the large powers apart.
fn bell(scale: FixedDecimal, a: FixedDecimal, b: FixedDecimal, k: FixedDecimal, c2: FixedDecimal, t: FixedDecimal) -> Result<FixedDecimal> {
    let kt = k.mul(t)?;
    // ln(c² + e^{kt}) = kt + ln(1 + c² e^{−kt}) for large kt
    let log_den = if kt.is_positive() {
        kt.add(FixedDecimal::ONE.add(c2.mul(kt.neg()?.exp()?)?)?.ln()?)?
    } else {
        c2.add(kt.exp()?)?.ln()?
    };
    scale.mul(a.mul(t)?.sub(b.mul(log_den)?)?.exp()?)
}

/// Circle: `2l e^{3t/2} / (1 + e^{2t})^{3/2}`.
pub fn fingerprint_ccmm(params: &FingerprintParams, t: FixedDecimal) -> Result<FixedDecimal> {
    bell(
        params.l.mul_int(2)?,
        fd_ratio(3, 2),
        fd_ratio(3, 2),
        FixedDecimal::TWO,
        FixedDecimal::ONE,
        t,
    )
}

/// Ellipse: `2c²l e^{3t/2} / (c² + e^{2t})^{3/2}`.
pub fn fingerprint_cemm(params: &FingerprintParams, t: FixedDecimal) -> Result<FixedDecimal> {
    if !params.c.is_positive() {
        return Err(AmmError::domain("c must be positive"));
    }
    let c2 = params.c.square()?;
    bell(
        c2.mul(params.l)?.mul_int(2)?,
        fd_ratio(3, 2),
        fd_ratio(3, 2),
        FixedDecimal::TWO,
        c2,
        t,
    )
}

/// Superellipse with equal α on both tokens:
/// `2α/(η−1) · e^{(η+1)t′/(2(η−1))} / (1 + e^{η t′/(η−1)})^{(η+1)/η}`
/// with `t′ = t − ln(s_y/s_x)`.
pub fn fingerprint_csemm(params: &FingerprintParams, t: FixedDecimal) -> Result<FixedDecimal> {
    let e = eta(params.alpha)?;
    let em1 = e.sub(FixedDecimal::ONE)?;
    if em1.is_zero() {
        return Err(AmmError::domain("the superellipse fingerprint is undefined at eta = 1"));
    }
    let ep1 = e.add(FixedDecimal::ONE)?;
    let shift = params.s_y.div(params.s_x)?.ln()?;
    bell(
        params.alpha.mul_int(2)?.div(em1)?,
        ep1.div(em1.mul_int(2)?)?,
        ep1.div(e)?,
        e.div(em1)?,
        FixedDecimal::ONE,
        t.sub(shift)?,
    )
}

/// Closed-form fingerprint for the selected mode.
pub fn fingerprint(params: &FingerprintParams, t: FixedDecimal) -> Result<FixedDecimal> {
    match params.mode {
        FingerprintMode::Ccmm => fingerprint_ccmm(params, t),
        FingerprintMode::Cemm => fingerprint_cemm(params, t),
        FingerprintMode::Csemm => fingerprint_csemm(params, t),
        FingerprintMode::Multimodal => Err(AmmError::validation(
            "the multimodal curve is given in polar form; use multimodal_radius",
        )),
    }
}

/// `1 − ½ sin²(αθ) = ¾ + ¼ cos(2αθ)` and its first two θ-derivatives.
fn ripple(alpha: i64, theta: FixedDecimal) -> Result<[FixedDecimal; 3]> {
    let a = FixedDecimal::from_int(alpha);
    let (s, c) = {
        let arg = theta.mul_int(2 * alpha)?;
        (arg.sin()?, arg.cos()?)
    };
    let g = fd_ratio(3, 4).add(c.div_int(4)?)?;
    let g1 = a.mul(s)?.div_int(2)?.neg()?;
    let g2 = a.square()?.mul(c)?.neg()?;
    Ok([g, g1, g2])
}

/// `r(θ) = L / (1 − ½ sin²(αθ))^{1/β}` with `β = α²`, θ in radians.
pub fn multimodal_radius(params: &FingerprintParams, theta: FixedDecimal) -> Result<FixedDecimal> {
    params.validate()?;
    let [g, _, _] = ripple(params.alpha_mm as i64, theta)?;
    let inv_beta = fd_ratio(1, params.beta_mm() as i64);
    params.big_l.mul(g.pow(inv_beta.neg()?)?)
}

/// Curvature of the multimodal polar curve at θ, from analytic derivatives.
pub fn multimodal_curvature(params: &FingerprintParams, theta: FixedDecimal) -> Result<FixedDecimal> {
    let [g, g1, g2] = ripple(params.alpha_mm as i64, theta)?;
    let m = fd_ratio(1, params.beta_mm() as i64).neg()?;
    // r = L g^m, r' = L m g^{m−1} g', r'' = L m [(m−1) g^{m−2} g'² + g^{m−1} g'']
    let gm = g.pow(m)?;
    let gm1 = gm.div(g)?;
    let gm2 = gm1.div(g)?;
    let big_l = params.big_l;
    let r = big_l.mul(gm)?;
    let r1 = big_l.mul(m)?.mul(gm1)?.mul(g1)?;
    let r2 = big_l
        .mul(m)?
        .mul(m.sub(FixedDecimal::ONE)?.mul(gm2)?.mul(g1.square()?)?.add(gm1.mul(g2)?)?)?;
    let r_sq = r.square()?;
    let r1_sq = r1.square()?;
    let num = r_sq.add(r1_sq.mul_int(2)?)?.sub(r.mul(r2)?)?;
    let den = r_sq.add(r1_sq)?;
    num.div(den.mul(den.sqrt()?)?)
}

/// Grid resolution used by [`modality_count`].
pub const MODALITY_GRID: u32 = 10_000;

/// Number of liquidity peaks of the multimodal curve inside the quadrant.
///
/// Liquidity is densest where the curve is flattest, so peaks are counted as
/// interior local minima of the curvature on a uniform grid over (0, π/2).
/// Runs of equal values count once.
pub fn modality_count(params: &FingerprintParams) -> Result<u32> {
    params.validate()?;
    let step = FixedDecimal::HALF_PI.div_int(MODALITY_GRID as i64)?;
    let mut values = Vec::with_capacity(MODALITY_GRID as usize);
    for k in 1..MODALITY_GRID {
        values.push(multimodal_curvature(params, step.mul_int(k as i64)?)?);
    }
    Ok(count_local_minima(&values))
}

/// Interior strict local minima, treating plateaus as single points.
pub fn count_local_minima(values: &[FixedDecimal]) -> u32 {
    let mut runs: Vec<FixedDecimal> = Vec::new();
    for &v in values {
        if runs.last() != Some(&v) {
            runs.push(v);
        }
    }
    runs.windows(3)
        .filter(|w| w[1] < w[0] && w[1] < w[2])
        .count() as u32
}

/// Golden-section tolerance on the arc parameter, in radians.
const PAYOFF_TOLERANCE: FixedDecimal = FixedDecimal::from_raw(1_000_000);

/// LP value `V(p) = min (p·x + y)` over the lower arc of the circle
/// (`mode = ccmm`) or of the ellipse with peak `c` (`mode = cemm`), at unit
/// liquidity.
pub fn lp_payoff(params: &FingerprintParams, price: FixedDecimal) -> Result<FixedDecimal> {
    if !price.is_positive() {
        return Err(AmmError::domain(format!("price must be positive, got {price}")));
    }
    let c = match params.mode {
        FingerprintMode::Ccmm => FixedDecimal::ONE,
        FingerprintMode::Cemm => params.c,
        _ => return Err(AmmError::validation("lp_payoff supports the ccmm and cemm curves")),
    };
    let r = params.l;
    // arc: x = r(1 − cos θ), y = c·r(1 − sin θ), θ ∈ [0, π/2]
    let value = |theta: FixedDecimal| -> Result<FixedDecimal> {
        let x = r.mul(FixedDecimal::ONE.sub(theta.cos()?)?)?;
        let y = c.mul(r)?.mul(FixedDecimal::ONE.sub(theta.sin()?)?)?;
        price.mul(x)?.add(y)
    };
    let inv_phi = FixedDecimal::from_raw(618_033_988_749_894_848);
    let (mut a, mut b) = (FixedDecimal::ZERO, FixedDecimal::HALF_PI);
    let mut c1 = b.sub(b.sub(a)?.mul(inv_phi)?)?;
    let mut c2 = a.add(b.sub(a)?.mul(inv_phi)?)?;
    let (mut f1, mut f2) = (value(c1)?, value(c2)?);
    let mut iterations = 0;
    while b.sub(a)? > PAYOFF_TOLERANCE {
        iterations += 1;
        if iterations > 200 {
            return Err(AmmError::Numeric(format!(
                "golden-section search stalled at [{a}, {b}] for price {price}"
            )));
        }
        if f1 <= f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b.sub(b.sub(a)?.mul(inv_phi)?)?;
            f1 = value(c1)?;
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a.add(b.sub(a)?.mul(inv_phi)?)?;
            f2 = value(c2)?;
        }
    }
    // the minimum may sit on an endpoint of the arc
    let mid = FixedDecimal::from_raw(a.raw() + (b.raw() - a.raw()) / 2);
    Ok(value(mid)?.min(value(FixedDecimal::ZERO)?).min(value(FixedDecimal::HALF_PI)?))
}

/// Liquidity density recovered from the payoff: `½ (V_q − q·V_qq)` at
/// `q = e^{t/2}`, by central differences of step `h` in `q`.
pub fn payoff_liquidity(params: &FingerprintParams, t: FixedDecimal, h: FixedDecimal) -> Result<FixedDecimal> {
    let q = t.div_int(2)?.exp()?;
    let [vm, v0, vp] = payoff_stencil(params, q, h)?;
    let vq = vp.sub(vm)?.div(h.mul_int(2)?)?;
    let vqq = vp.sub(v0.mul_int(2)?)?.add(vm)?.div(h.square()?)?;
    vq.sub(q.mul(vqq)?)?.div_int(2)
}

/// Plain second difference `d²V/dq²` at `q = e^{t/2}`.
pub fn payoff_sqrt_price_curvature(params: &FingerprintParams, t: FixedDecimal, h: FixedDecimal) -> Result<FixedDecimal> {
    let q = t.div_int(2)?.exp()?;
    let [vm, v0, vp] = payoff_stencil(params, q, h)?;
    vp.sub(v0.mul_int(2)?)?.add(vm)?.div(h.square()?)
}

fn payoff_stencil(params: &FingerprintParams, q: FixedDecimal, h: FixedDecimal) -> Result<[FixedDecimal; 3]> {
    if h >= q {
        return Err(AmmError::domain("finite-difference step exceeds √p"));
    }
    let at = |q: FixedDecimal| -> Result<FixedDecimal> { lp_payoff(params, q.square()?) };
    Ok([at(q.sub(h)?)?, at(q)?, at(q.add(h)?)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fd;

    fn close(a: FixedDecimal, b: FixedDecimal, tol: &str) -> bool {
        a.abs_diff(b) <= fd(tol)
    }

    #[test]
    fn circle_peak_and_tails() {
        let p = FingerprintParams::new(FingerprintMode::Ccmm);
        // l/√2 = 1 + √2
        let peak = fingerprint_ccmm(&p, FixedDecimal::ZERO).unwrap();
        assert!(close(peak, fd("2.414213562373095049"), "0.000000000000000003"));
        for t in ["-20", "20"] {
            assert!(fingerprint_ccmm(&p, fd(t)).unwrap() < fd("0.000001"));
        }
        for t in ["-0.5", "0.5", "2"] {
            assert!(fingerprint_ccmm(&p, fd(t)).unwrap() < peak);
        }
    }

    #[test]
    fn ellipse_reduces_to_circle_and_shifts() {
        let circle = FingerprintParams::new(FingerprintMode::Ccmm);
        let mut ellipse = FingerprintParams::new(FingerprintMode::Cemm);
        for t in ["-3", "-0.25", "0", "1.5", "4"] {
            let a = fingerprint_ccmm(&circle, fd(t)).unwrap();
            let b = fingerprint_cemm(&ellipse, fd(t)).unwrap();
            assert!(close(a, b, "0.000000000000000002"), "{t}");
        }
        ellipse.c = fd("2");
        // 8l/5^{3/2} = 2.44301235685374679194... (40-digit reference)
        let v = fingerprint_cemm(&ellipse, FixedDecimal::ZERO).unwrap();
        assert!(close(v, fd("2.443012356853746792"), "0.000000000000001"));
    }

    #[test]
    fn superellipse_translation() {
        let mut p = FingerprintParams::new(FingerprintMode::Csemm);
        p.alpha = fd("4");
        let base: Vec<_> = ["-1", "0", "0.7"].iter().map(|t| fingerprint_csemm(&p, fd(t)).unwrap()).collect();
        p.s_y = FixedDecimal::ONE.exp().unwrap();
        for (t, b) in ["0", "1", "1.7"].iter().zip(base) {
            assert!(close(fingerprint_csemm(&p, fd(t)).unwrap(), b, "0.000000000000001"));
        }
        p.alpha = fd("2");
        assert!(matches!(fingerprint_csemm(&p, FixedDecimal::ZERO), Err(AmmError::Domain(_))));
    }

    #[test]
    fn multimodal_radius_range_and_period() {
        let p = FingerprintParams::multimodal(4).unwrap();
        assert_eq!(multimodal_radius(&p, FixedDecimal::ZERO).unwrap(), FixedDecimal::ONE);
        // sin²(4θ) = 1 at θ = π/8: 2^{1/16} = 1.04427378242741384...
        let top = multimodal_radius(&p, FixedDecimal::PI.div_int(8).unwrap()).unwrap();
        assert!(close(top, fd("1.044273782427413840"), "0.000000000000001"));
        let period = FixedDecimal::PI.div_int(4).unwrap();
        for th in ["0.1", "0.33", "1.2"] {
            let a = multimodal_radius(&p, fd(th)).unwrap();
            let b = multimodal_radius(&p, fd(th).add(period).unwrap()).unwrap();
            assert!(close(a, b, "0.000000000001"));
        }
        assert!(FingerprintParams::multimodal(5).is_err());
        assert!(FingerprintParams::multimodal(2).is_err());
    }

    #[test]
    fn modality_taxonomy() {
        for (alpha, peaks) in [(4, 1), (6, 2), (8, 3)] {
            let p = FingerprintParams::multimodal(alpha).unwrap();
            assert_eq!(modality_count(&p).unwrap(), peaks, "alpha = {alpha}");
        }
    }

    #[test]
    fn local_minima_merge_plateaus() {
        let v: Vec<_> = ["3", "1", "1", "1", "2", "0", "4", "4"].iter().map(|s| fd(s)).collect();
        assert_eq!(count_local_minima(&v), 2);
    }

    #[test]
    fn payoff_matches_closed_form() {
        let circle = FingerprintParams::new(FingerprintMode::Ccmm);
        assert!(close(lp_payoff(&circle, FixedDecimal::ONE).unwrap(), fd("2"), "0.000000000001"));
        let mut ellipse = FingerprintParams::new(FingerprintMode::Cemm);
        ellipse.c = fd("1.5");
        for p in ["0.1", "0.9", "3", "10"] {
            let pr = fd(p);
            // l (p + c − √(p² + c²))
            let expect = ellipse
                .l
                .mul(pr.add(ellipse.c).unwrap().sub(pr.square().unwrap().add(ellipse.c.square().unwrap()).unwrap().sqrt().unwrap()).unwrap())
                .unwrap();
            assert!(close(lp_payoff(&ellipse, pr).unwrap(), expect, "0.000000000001"), "{p}");
        }
        assert!(lp_payoff(&circle, FixedDecimal::ZERO).is_err());
    }

    #[test]
    fn payoff_liquidity_tracks_the_circle_fingerprint() {
        let p = FingerprintParams::new(FingerprintMode::Ccmm);
        let h = fd("0.0001");
        let a = payoff_liquidity(&p, FixedDecimal::ZERO, h).unwrap();
        let b = payoff_liquidity(&p, fd("1"), h).unwrap();
        let ratio_lp = a.div(b).unwrap();
        let ratio_fp = fingerprint_ccmm(&p, FixedDecimal::ZERO)
            .unwrap()
            .div(fingerprint_ccmm(&p, fd("1")).unwrap())
            .unwrap();
        assert!(close(ratio_lp, ratio_fp, "0.00001"));
    }
}
