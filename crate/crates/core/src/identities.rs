//! Verifies, on concrete profiles, the integral and differential identities
//! that underpin the decay and symmetry arguments: exponential tail rates,
//! the quotient bounds feeding the comparison argument, the weighted energy
//! derivative, and the vanishing Wronskian integral.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DecayCertificate, Nonlinearity};
use crate::profile::RadialProfile;
use crate::quad::adaptive_simpson;
use crate::scalar::Scalar;

/// Absolute tolerance for every `G(r, z) = integral of g(r, t) dt` quadrature;
/// g is smooth on the attained range, so this is cheap to reach.
const G_TOL: f64 = 1e-12;
/// Two components count as equal below this, switching the quotients to
/// their defined value `m`.
const EQUAL_CUTOFF: f64 = 1e-14;
/// Minimum number of grid samples in the tail window for a defensible
/// rate fit.
const MIN_TAIL_SAMPLES: usize = 10;

/// Everything the identity checks learned about one profile.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport<S: Scalar> {
    /// Absolute value of the Wronskian integral; zero for true solutions.
    pub wronskian_defect: S,
    /// Sup defect of the energy derivative identity; absent when the
    /// nonlinearity carries no additive split.
    pub energy_defect: Option<S>,
    pub decay_rate_u: S,
    pub decay_rate_v: S,
    pub decay_pass: bool,
    pub certificate: DecayCertificate<S>,
    /// Bound `e^(-sqrt(m) r_end)` on what truncating the infinite integrals
    /// at the profile end can hide.
    pub truncation_bound: S,
}

impl<S: Scalar> IdentityReport<S> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "wronskian_defect": self.wronskian_defect.as_f64(),
            "energy_defect": self.energy_defect.map(|d| d.as_f64()),
            "decay_rate_u": self.decay_rate_u.as_f64(),
            "decay_rate_v": self.decay_rate_v.as_f64(),
            "decay_pass": self.decay_pass,
            "certificate": {
                "m": self.certificate.m.as_f64(),
                "R": self.certificate.onset_radius.as_f64(),
                "eps": self.certificate.eps.as_f64(),
            },
            "truncation_bound": self.truncation_bound.as_f64(),
        })
    }
}

/// Least-squares slope of `ys` against `xs`.
fn fit_slope<S: Scalar>(xs: &[S], ys: &[S]) -> S {
    let count = S::of(xs.len() as f64);
    let mut mx = S::zero();
    let mut my = S::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        mx = mx + x;
        my = my + y;
    }
    mx = mx / count;
    my = my / count;
    let mut num = S::zero();
    let mut den = S::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        num = num + (x - mx) * (y - my);
        den = den + (x - mx) * (x - mx);
    }
    num / den
}

/// Fits the exponential tail rates of `u + |u'|` and `v + |v'|` on the
/// window `[max(R, r_end/2), 0.9 r_end]` and checks them against the
/// certified floor: both slopes must stay at or below `-sqrt(m) + 0.05`,
/// and `e^(-sqrt(m) r) (u + v)` must be monotone decreasing past `R`.
/// The profile is assumed to be a decaying trajectory.
pub fn verify_decay<S: Scalar>(
    profile: &RadialProfile<S>,
    cert: &DecayCertificate<S>,
) -> Result<(S, S, bool)> {
    let r_end = profile.r_end();
    let lo = (r_end * S::of(0.5)).max(cert.onset_radius);
    let hi = r_end * S::of(0.9);
    let grid = profile.grid();
    let mut rs = Vec::new();
    let mut log_u = Vec::new();
    let mut log_v = Vec::new();
    for i in 0..profile.len() {
        if grid[i] < lo || grid[i] > hi {
            continue;
        }
        let zu = profile.u()[i] + profile.du()[i].abs();
        let zv = profile.v()[i] + profile.dv()[i].abs();
        if !(zu > S::zero()) || !(zv > S::zero()) {
            continue;
        }
        rs.push(grid[i]);
        log_u.push(zu.ln());
        log_v.push(zv.ln());
    }
    if rs.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientTail(format!(
            "window [{lo}, {hi}] holds {} usable samples, need {MIN_TAIL_SAMPLES}",
            rs.len()
        )));
    }
    let rate_u = fit_slope(&rs, &log_u);
    let rate_v = fit_slope(&rs, &log_v);
    let bound = -cert.m.sqrt() + S::of(0.05);
    let mut pass = rate_u <= bound && rate_v <= bound;

    // The weighted sum must lose ground at every step past the onset radius;
    // a microscopic relative slack absorbs rounding on near-zero tails.
    let root_m = cert.m.sqrt();
    let slack = S::one() + S::of(1e-12);
    let mut prev: Option<S> = None;
    for i in 0..profile.len() {
        if grid[i] < cert.onset_radius {
            continue;
        }
        let w = (-root_m * grid[i]).exp() * (profile.u()[i] + profile.v()[i]);
        if let Some(p) = prev {
            if w > p * slack {
                pass = false;
                break;
            }
        }
        prev = Some(w);
    }
    Ok((rate_u, rate_v, pass))
}

/// Checks the quotient bounds `c1, c2 >= m` on the tail `r >= R`, where
///
/// ```text
/// c1 = -(f(r,u,v) - f(r,v,u)) / (u - v),   c2 = -(f(r,u,v) + f(r,v,u)) / (u + v)
/// ```
///
/// and both are defined to be `m` itself wherever `|u - v|` is below the
/// equality cutoff. For the coupled power family both quotients approach 1
/// as the components decay, so any `m < 1` holds in the far tail.
pub fn check_c1_c2_bound<S: Scalar>(
    f: &Nonlinearity<S>,
    profile: &RadialProfile<S>,
    cert: &DecayCertificate<S>,
) -> bool {
    let cutoff = S::of(EQUAL_CUTOFF);
    for i in 0..profile.len() {
        let r = profile.grid()[i];
        if r < cert.onset_radius {
            continue;
        }
        let u = profile.u()[i].max(S::zero());
        let v = profile.v()[i].max(S::zero());
        let (c1, c2) = if (u - v).abs() < cutoff {
            (cert.m, cert.m)
        } else {
            let fuv = f.eval(r, u, v);
            let fvu = f.eval(r, v, u);
            (-(fuv - fvu) / (u - v), -(fuv + fvu) / (u + v))
        };
        if c1 < cert.m || c2 < cert.m {
            return false;
        }
    }
    true
}

/// Sup defect, over grid intervals, between the increment of the weighted
/// energy
///
/// ```text
/// E(r) = r^(2n-2) (-u'^2/2 + v'^2/2 - G(r,u) + G(r,v))
/// ```
///
/// and the integral of its exact derivative
///
/// ```text
/// r^(2n-2) h(r,u,v)(v u' - u v') - r^(2n-3) ∫_v^u [r g_r(r,t) + (2n-2) g(r,t)] dt
/// ```
///
/// along the profile. Any exact trajectory of the system satisfies the
/// identity, so the defect measures integration plus interpolation error;
/// a pair that solves no equation leaves a defect bounded away from zero.
pub fn check_energy_identity<S: Scalar>(
    f: &Nonlinearity<S>,
    profile: &RadialProfile<S>,
) -> Result<S> {
    let split = f.split().ok_or(Error::MissingSplit)?;
    let g_tol = S::of(G_TOL);
    let big_g = |r: S, z: S| {
        let top = z.max(S::zero());
        adaptive_simpson(&|t| split.g(r, t), S::zero(), top, g_tol)
    };
    let n = profile.params().n;
    let pow_outer = S::of(2.0 * f64::from(n) - 2.0);
    let grid = profile.grid();
    let half = S::of(0.5);

    let energy = |i: usize| {
        let r = grid[i];
        let (du, dv) = (profile.du()[i], profile.dv()[i]);
        r.powf(pow_outer)
            * (half * (dv * dv - du * du) - big_g(r, profile.u()[i]) + big_g(r, profile.v()[i]))
    };
    let e: Vec<S> = (0..profile.len()).map(energy).collect();
    let e_scale = e.iter().fold(S::zero(), |a, &x| a.max(x.abs()));

    // The r^(2n-3) weight is folded into the inner integrals termwise so
    // the planar case never touches a negative power at the origin.
    let integrand = |r: S| {
        let [u, du, v, dv] = profile.eval(r).expect("quadrature stays inside the grid");
        let (uc, vc) = (u.max(S::zero()), v.max(S::zero()));
        let lead = r.powf(pow_outer) * split.h(r, uc, vc) * (vc * du - uc * dv);
        let ig_r = adaptive_simpson(&|t| split.g_r(r, t), vc, uc, g_tol);
        let mut tail = r.powf(pow_outer) * ig_r;
        if n > 1 {
            let ig = adaptive_simpson(&|t| split.g(r, t), vc, uc, g_tol);
            tail = tail + pow_outer * r.powf(pow_outer - S::one()) * ig;
        }
        lead - tail
    };

    let quad_tol = S::of(1e-13) * (S::one() + e_scale);
    let mut worst = S::zero();
    for i in 0..profile.len() - 1 {
        let lhs = e[i + 1] - e[i];
        let rhs = adaptive_simpson(&integrand, grid[i], grid[i + 1], quad_tol);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// The Wronskian integral
///
/// ```text
/// ∫ r^(n-1) (f(r,v,u) u - f(r,u,v) v) dr
/// ```
///
/// over the stored grid range. For a true solution pair it telescopes to
/// the boundary values of `r^(n-1)(u'v - v'u)`, both of which vanish, so
/// its magnitude is a solution test; its sign separates which component
/// dominates the coupling imbalance. Quadrature runs per grid interval,
/// matching the piecewise cubic interpolant.
pub fn wronskian_integral<S: Scalar>(f: &Nonlinearity<S>, profile: &RadialProfile<S>) -> S {
    let n1 = S::of(f64::from(profile.params().n)) - S::one();
    let integrand = |r: S| {
        let [u, _, v, _] = profile.eval(r).expect("quadrature stays inside the grid");
        let (uc, vc) = (u.max(S::zero()), v.max(S::zero()));
        r.powf(n1) * (f.eval(r, vc, uc) * uc - f.eval(r, uc, vc) * vc)
    };
    let mut scale = S::zero();
    for i in 0..profile.len() {
        scale = scale
            .max(profile.u()[i].abs())
            .max(profile.du()[i].abs())
            .max(profile.v()[i].abs())
            .max(profile.dv()[i].abs());
    }
    let quad_tol = S::of(1e-13) * (S::one() + scale);
    let grid = profile.grid();
    let mut total = S::zero();
    for i in 0..profile.len() - 1 {
        total = total + adaptive_simpson(&integrand, grid[i], grid[i + 1], quad_tol);
    }
    total
}

/// Runs every identity check on one profile and bundles the results.
/// The energy defect is reported only when the nonlinearity carries its
/// additive split.
pub fn analyze<S: Scalar>(
    f: &Nonlinearity<S>,
    profile: &RadialProfile<S>,
    cert: &DecayCertificate<S>,
) -> Result<IdentityReport<S>> {
    let (decay_rate_u, decay_rate_v, decay_pass) = verify_decay(profile, cert)?;
    let wronskian_defect = wronskian_integral(f, profile).abs();
    let energy_defect = match f.split() {
        Some(_) => Some(check_energy_identity(f, profile)?),
        None => None,
    };
    let truncation_bound = (-cert.m.sqrt() * profile.r_end()).exp();
    Ok(IdentityReport {
        wronskian_defect,
        energy_defect,
        decay_rate_u,
        decay_rate_v,
        decay_pass,
        certificate: *cert,
        truncation_bound,
    })
}

/// Shape of the component ratio `u/v` along a profile. Reported as a raw
/// observation: whether strictly monotone ratios occur on genuine solutions
/// is not settled by any of the implemented criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RatioTrend {
    /// `u = v` within rounding everywhere.
    Identical,
    /// Constant ratio distinct from 1, the signature of a scaled pair.
    Constant,
    Increasing,
    Decreasing,
    /// No single direction; includes ratios too noisy to classify.
    Mixed,
}

/// Classifies the trend of `u/v` on the part of the profile where both
/// components are resolved (above `1e-6` of the profile scale, keeping
/// event-floor noise out of the quotient).
pub fn ratio_trend<S: Scalar>(profile: &RadialProfile<S>) -> RatioTrend {
    let mut scale = S::zero();
    for i in 0..profile.len() {
        scale = scale.max(profile.u()[i].abs()).max(profile.v()[i].abs());
    }
    let floor = S::of(1e-6) * scale;
    let mut ratios = Vec::new();
    for i in 0..profile.len() {
        if profile.u()[i] > floor && profile.v()[i] > floor {
            ratios.push(profile.u()[i] / profile.v()[i]);
        }
    }
    if ratios.len() < 2 {
        return RatioTrend::Mixed;
    }
    let tol = S::of(1e-10);
    let near = |a: S, b: S| (a - b).abs() <= tol * (S::one() + a.abs().max(b.abs()));
    if ratios.iter().all(|&x| near(x, S::one())) {
        return RatioTrend::Identical;
    }
    if ratios.iter().all(|&x| near(x, ratios[0])) {
        return RatioTrend::Constant;
    }
    let up = ratios.windows(2).all(|w| w[1] > w[0]);
    let down = ratios.windows(2).all(|w| w[1] < w[0]);
    match (up, down) {
        (true, false) => RatioTrend::Increasing,
        (false, true) => RatioTrend::Decreasing,
        _ => RatioTrend::Mixed,
    }
}
