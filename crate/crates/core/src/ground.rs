//! Scalar ground states: the closed-form one-dimensional soliton and the
//! shooting bisection that finds positive decaying profiles in any
//! subcritical dimension.
//!
//! The scalar problem is the diagonal restriction of the system with the
//! coupling switched off: `u'' + (n-1)/r u' = u - u^(2q-1)`, `u'(0) = 0`,
//! `u > 0`, `u -> 0` at infinity. Shots above the critical height cross
//! zero, shots below drift back toward the positive equilibrium and never
//! decay, so the critical height is a bisection limit.


use crate::error::{Error, Result};
use crate::integrator::{integrate, probe, OutcomeKind, ShootingConfig, TrajectoryOutcome};
use crate::model::{Nonlinearity, Parameters};
use crate::profile::RadialProfile;
use crate::scalar::Scalar;

/// Closed-form 1D soliton value and derivative at radius `r`:
///
/// ```text
/// u(r) = q^(1/(2q-2)) sech^(1/(q-1))((q-1) r),    u'(r) = -u(r) tanh((q-1) r)
/// ```
///
/// solves `u'' = u - u^(2q-1)` with `u'(0) = 0` for every `q > 1`.
pub fn soliton_1d<S: Scalar>(q: S, r: S) -> (S, S) {
    let qm1 = q - S::one();
    let a = qm1 * r;
    let sech = S::one() / a.cosh();
    let u = soliton_height(q) * sech.powf(S::one() / qm1);
    (u, -u * a.tanh())
}

/// Central height `q^(1/(2q-2))` of the 1D soliton.
pub fn soliton_height<S: Scalar>(q: S) -> S {
    q.powf(S::one() / (S::of(2.0) * q - S::of(2.0)))
}

/// A numerically certified scalar ground state.
#[derive(Debug, Clone)]
pub struct GroundState<S: Scalar> {
    pub params: Parameters<S>,
    /// Critical shot height `u(0)`.
    pub height: S,
    /// The decaying trajectory, integrated at the solver's internal
    /// tolerance and terminated by the decay event.
    pub profile: RadialProfile<S>,
    /// Width of the final bisection bracket around `height`.
    pub bracket: S,
    pub iterations: u32,
}

impl<S: Scalar> GroundState<S> {
    /// Metadata sidecar `{n, q, height}` written next to profile CSVs.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.params.n,
            "q": self.params.q.as_f64(),
            "height": self.height.as_f64(),
        })
    }

    pub fn write_sidecar(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(f, &self.sidecar_json())?;
        Ok(())
    }
}

/// Everything the diagonal bisection learned.
#[derive(Debug, Clone)]
pub struct DiagonalGround<S: Scalar> {
    pub height: S,
    pub outcome: TrajectoryOutcome<S>,
    pub bracket: S,
    pub iterations: u32,
}

/// Outcome labels on either side of the separatrix. Crossing zero or
/// blowing up means the shot was too high; running out to the horizon
/// without decaying means it was too low.
fn side(kind: OutcomeKind) -> Option<bool> {
    match kind {
        OutcomeKind::ZeroCrossing | OutcomeKind::Blowup => Some(true),
        OutcomeKind::Indeterminate => Some(false),
        OutcomeKind::Decay => None,
    }
}

/// Bisects along the diagonal `u0 = v0` for the critical height separating
/// high shots (zero crossing or blowup) from low ones (indeterminate).
/// `lo` must sit on the low side; it is normally the positive equilibrium.
///
/// The bracket is tightened to a few units in the last place, far beyond
/// the integration tolerance, because the separatrix is exponentially
/// unstable: only a near-exact height keeps the trajectory on the decaying
/// branch long enough to reach the decay floor.
pub fn ground_on_diagonal<S: Scalar>(
    f: &Nonlinearity<S>,
    params: &Parameters<S>,
    lo: S,
    cfg: &ShootingConfig<S>,
) -> Result<DiagonalGround<S>> {
    cfg.validate()?;
    params.require_subcritical()?;
    // Shots are integrated well below the requested tolerance: local error
    // seeds the growing tail mode, and the trajectory minimum scales like
    // the square root of that contamination. The floor keeps the final
    // decay event reachable.
    let tol_shot = (cfg.tol * S::of(1e-5)).max(S::of(1e-13)).max(S::epsilon() * S::of(500.0));
    let shot_cfg = ShootingConfig { tol: tol_shot, ..*cfg };

    let classify = |height: S| -> Result<Option<bool>> {
        Ok(side(probe(f, params, height, height, &shot_cfg)?.kind))
    };

    let finish = |height: S, bracket: S, iterations: u32| -> Result<DiagonalGround<S>> {
        let outcome = integrate(f, params, height, height, &shot_cfg)?;
        if outcome.kind != OutcomeKind::Decay {
            return Err(Error::DichotomyViolation(format!(
                "bracket converged to width {bracket} at height {height} but the final shot \
                 ended as {} instead of decaying",
                outcome.kind
            )));
        }
        Ok(DiagonalGround { height, outcome, bracket, iterations })
    };

    let mut lo = lo;
    match classify(lo)? {
        Some(false) => {}
        Some(true) => {
            return Err(Error::DichotomyViolation(format!(
                "supplied low anchor {lo} already shoots past zero"
            )))
        }
        None => return finish(lo, S::zero(), 0),
    }

    let cap = S::of(1e3);
    let mut hi = S::of(10.0).max(lo * S::of(2.0));
    loop {
        match classify(hi)? {
            Some(true) => break,
            Some(false) => {
                lo = hi;
                hi = hi * S::of(10.0);
                if hi > cap {
                    return Err(Error::NoGroundState { limit: cap.as_f64() });
                }
            }
            None => return finish(hi, S::zero(), 0),
        }
    }

    let mut iterations = 0u32;
    let ulp_width = |hi: S| S::of(4.0) * S::epsilon() * hi.max(S::one());
    while hi - lo > ulp_width(hi) && iterations < 200 {
        let mid = (lo + hi) / S::of(2.0);
        if mid <= lo || mid >= hi {
            break; // bracket no longer splittable in this precision
        }
        iterations += 1;
        match classify(mid)? {
            Some(true) => hi = mid,
            Some(false) => lo = mid,
            None => return finish(mid, hi - lo, iterations),
        }
    }
    finish((lo + hi) / S::of(2.0), hi - lo, iterations)
}

/// Finds the scalar ground state for dimension `n` and exponent `q` by
/// diagonal bisection of the uncoupled system.
pub fn solve_scalar<S: Scalar>(n: u32, q: S, cfg: &ShootingConfig<S>) -> Result<GroundState<S>> {
    let params = Parameters::new(n, q, S::zero())?;
    let f = Nonlinearity::coupled_power(&params);
    // The scalar equilibrium u = 1 sits strictly below the critical height.
    let diag = ground_on_diagonal(&f, &params, S::one(), cfg)?;
    Ok(GroundState {
        params,
        height: diag.height,
        profile: diag.outcome.profile,
        bracket: diag.bracket,
        iterations: diag.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::residual;

    /// 5-point central second derivative; the 3-point stencil's roundoff
    /// is too large to certify the soliton at the 1e-8 level.
    fn d2_5pt(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
            / (12.0 * h * h)
    }

    #[test]
    fn soliton_heights_are_exact() {
        assert!((soliton_height(2.0f64) - 2.0f64.sqrt()).abs() < 1e-15);
        assert!((soliton_height(3.0f64) - 3.0f64.powf(0.25)).abs() < 1e-15);
        assert!((soliton_height(4.0f64) - 4.0f64.powf(1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn soliton_satisfies_scalar_equation() {
        for &q in &[1.5, 2.0, 2.5, 3.0, 4.0] {
            let mut r = 0.05;
            while r < 3.0 {
                let (u, du) = soliton_1d(q, r);
                let dd = d2_5pt(|x| soliton_1d(q, x).0, r, 1e-3);
                let res = dd - (u - u.powf(2.0 * q - 1.0));
                assert!(res.abs() < 1e-8, "q={q} r={r}: residual {res}");
                let dd1 = (soliton_1d(q, r + 1e-4).0 - soliton_1d(q, r - 1e-4).0) / 2e-4;
                assert!((du - dd1).abs() < 1e-7, "q={q} r={r}: derivative mismatch");
                r += 0.23;
            }
            // Even symmetry at the origin.
            assert_eq!(soliton_1d(q, 0.0).1, 0.0);
        }
    }

    #[test]
    fn scalar_ground_state_matches_soliton_q2() {
        let cfg = ShootingConfig::default();
        let gs = solve_scalar(1, 2.0, &cfg).unwrap();
        assert!(
            (gs.height - 2.0f64.sqrt()).abs() < 1e-7,
            "height {} vs sqrt(2)",
            gs.height
        );
        // Sup error against the closed form on [0, 10].
        let mut worst: f64 = 0.0;
        let mut r = 0.0;
        while r <= 10.0 {
            let want = soliton_1d(2.0, r).0;
            let got = if r < gs.profile.r0() { gs.height } else { gs.profile.eval(r).unwrap()[0] };
            worst = worst.max((got - want).abs());
            r += 0.05;
        }
        assert!(worst < 1e-6, "sup error {worst}");
        // Bisection either reaches a few-ULP bracket or stops early when a
        // midpoint shot itself decays; both leave a tiny bracket.
        assert!(gs.bracket < 1e-9, "bracket {}", gs.bracket);
        assert!(gs.iterations <= 200);
    }

    #[test]
    fn scalar_ground_state_matches_soliton_q3() {
        let gs = solve_scalar(1, 3.0, &ShootingConfig::default()).unwrap();
        assert!(
            (gs.height - 3.0f64.powf(0.25)).abs() < 1e-7,
            "height {} vs 3^(1/4)",
            gs.height
        );
    }

    #[test]
    fn dimension_three_height_agrees_with_grid_search() {
        // Independent coarse bracketing: walk the shot height in shrinking
        // grids, watching only the raw outcome labels.
        let cfg = ShootingConfig::default();
        let params = Parameters::new(3, 2.0, 0.0).unwrap();
        let f = Nonlinearity::coupled_power(&params);
        let is_high = |h: f64| -> bool {
            matches!(
                probe(&f, &params, h, h, &cfg).unwrap().kind,
                OutcomeKind::ZeroCrossing | OutcomeKind::Blowup
            )
        };
        let (mut lo, mut hi) = (4.0, 5.0);
        assert!(!is_high(lo) && is_high(hi), "height must lie in (4, 5)");
        for _ in 0..3 {
            let step = (hi - lo) / 10.0;
            let mut t = lo + step;
            while t < hi - step / 2.0 && !is_high(t) {
                t += step;
            }
            lo = t - step;
            hi = t;
        }
        let gs = solve_scalar(3, 2.0, &cfg).unwrap();
        assert!(
            gs.height > lo - 1e-9 && gs.height < hi + 1e-9,
            "height {} outside grid bracket [{lo}, {hi}]",
            gs.height
        );
    }

    #[test]
    fn ground_profile_decays_with_small_residual() {
        let cfg: ShootingConfig<f64> = ShootingConfig::default();
        let gs = solve_scalar(1, 2.0, &cfg).unwrap();
        let f = Nonlinearity::coupled_power(&gs.params);
        let res = residual(&f, &gs.profile).unwrap();
        assert!(res < 1e-7, "equation residual {res}");
        // Tail truly reached the decay floor.
        let last = gs.profile.final_state();
        let floor = cfg.decay_floor * gs.height;
        assert!(last[0] < floor && last[1].abs() < floor);
        assert!(gs.profile.r_end() > 10.0);
    }

    #[test]
    fn flat_nonlinearity_has_no_ground_state() {
        use crate::model::GrowthBound;
        let params = Parameters::new(1, 2.0, 0.0).unwrap();
        let f = Nonlinearity::from_fn("flat", GrowthBound::new(1.0, 2.0).unwrap(), |_, _, _| 0.0);
        let err = ground_on_diagonal(&f, &params, 1.0, &ShootingConfig::default());
        match err {
            Err(Error::NoGroundState { limit }) => assert!((limit - 1e3).abs() < 1.0),
            other => panic!("expected NoGroundState, got {other:?}"),
        }
    }

    #[test]
    fn sidecar_json_shape() {
        let gs = solve_scalar(1, 2.0, &ShootingConfig::default()).unwrap();
        let v = gs.sidecar_json();
        assert_eq!(v["n"], 1);
        assert_eq!(v["q"], 2.0);
        assert!((v["height"].as_f64().unwrap() - 2.0f64.sqrt()).abs() < 1e-6);
    }
}
