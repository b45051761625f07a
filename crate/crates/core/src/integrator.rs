//! Adaptive shooting integrator for the radial system with event detection.
//!
//! The state vector is `[u, u', v, v']`. Steps are taken by the Dormand and
//! Prince 5(4) pair with the first-same-as-last optimization; events are
//! located on accepted steps through the cubic Hermite dense output, whose
//! endpoint slopes are exact right-hand side evaluations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Nonlinearity, Parameters};
use crate::profile::{hermite_cubic, RadialProfile};
use crate::quad::adaptive_simpson;
use crate::scalar::Scalar;

/// Tunables for one shooting run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig<S: Scalar> {
    /// Offset radius for the Taylor-consistent start; the drift term is
    /// singular at the origin itself.
    pub r_start: S,
    /// Horizon; trajectories that reach it without an event are labeled
    /// indeterminate.
    pub r_max: S,
    /// Local error tolerance, used as both absolute and relative weight.
    pub tol: S,
    /// Blowup fires when a component exceeds this multiple of
    /// `max(u0, v0, 1)`.
    pub blowup_factor: S,
    /// Decay fires when all of `u, v, |u'|, |v'|` drop below this multiple
    /// of `max(u0, v0)` while both components are nonincreasing.
    pub decay_floor: S,
}

impl<S: Scalar> Default for ShootingConfig<S> {
    fn default() -> Self {
        ShootingConfig {
            r_start: S::of(1e-4),
            // 50 e-foldings of the default rate floor m = 1/2; the tail
            // truncated beyond this horizon is below 2e-22.
            r_max: S::of(50.0 / 0.5f64.sqrt()),
            tol: S::of(1e-8),
            blowup_factor: S::of(1e3),
            decay_floor: S::of(1e-5),
        }
    }
}

impl<S: Scalar> ShootingConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_start > S::zero()) || !self.r_start.is_finite() {
            return Err(Error::InvalidConfig(format!("r_start must be > 0, got {}", self.r_start)));
        }
        if !(self.r_max > self.r_start) || !self.r_max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "r_max must exceed r_start = {}, got {}",
                self.r_start, self.r_max
            )));
        }
        if !(self.tol > S::zero()) || !(self.tol <= S::of(1e-2)) {
            return Err(Error::InvalidConfig(format!("tol must lie in (0, 1e-2], got {}", self.tol)));
        }
        if !(self.blowup_factor > S::one()) {
            return Err(Error::InvalidConfig(format!(
                "blowup_factor must be > 1, got {}",
                self.blowup_factor
            )));
        }
        if !(self.decay_floor > S::zero()) || !(self.decay_floor < S::one()) {
            return Err(Error::InvalidConfig(format!(
                "decay_floor must lie in (0, 1), got {}",
                self.decay_floor
            )));
        }
        Ok(())
    }
}

/// How a trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeKind {
    /// Both components and their slopes fell below the decay floor while
    /// nonincreasing: the shot is a numerical ground state candidate.
    Decay,
    /// A component that started positive touched zero.
    ZeroCrossing,
    /// A component exceeded the blowup threshold.
    Blowup,
    /// The horizon was reached without any event.
    Indeterminate,
}

impl OutcomeKind {
    /// Stable small-integer code, used by census basin maps.
    pub fn code(self) -> u8 {
        match self {
            OutcomeKind::Decay => 0,
            OutcomeKind::ZeroCrossing => 1,
            OutcomeKind::Blowup => 2,
            OutcomeKind::Indeterminate => 3,
        }
    }
}

impl std::fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OutcomeKind::Decay => "Decay",
            OutcomeKind::ZeroCrossing => "ZeroCrossing",
            OutcomeKind::Blowup => "Blowup",
            OutcomeKind::Indeterminate => "Indeterminate",
        };
        f.write_str(s)
    }
}

/// Which component triggered a zero crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    U,
    V,
}

/// Result of one shooting run: the label, where the event fired (if any),
/// and the full trajectory including the interpolated event point.
#[derive(Debug, Clone)]
pub struct TrajectoryOutcome<S: Scalar> {
    pub kind: OutcomeKind,
    pub event_radius: Option<S>,
    pub profile: RadialProfile<S>,
}

/// Taylor-consistent state at the offset radius `r_s`: with `u'(0) = 0` the
/// series `u(r) = u0 - f(0,u0,v0) r^2 / (2n) + O(r^4)` balances the drift
/// term, and likewise for `v` with swapped arguments.
pub fn taylor_start<S: Scalar>(
    f: &Nonlinearity<S>,
    params: &Parameters<S>,
    u0: S,
    v0: S,
    r_s: S,
) -> [S; 4] {
    let n = S::of(params.n as f64);
    let fu = f.eval(S::zero(), u0, v0);
    let fv = f.eval(S::zero(), v0, u0);
    let half = r_s * r_s / (S::of(2.0) * n);
    [u0 - fu * half, -fu * r_s / n, v0 - fv * half, -fv * r_s / n]
}

/// Shoots from heights `(u0, v0)` at the origin and integrates until an
/// event or the horizon. Requires the subcritical exponent window.
pub fn integrate<S: Scalar>(
    f: &Nonlinearity<S>,
    params: &Parameters<S>,
    u0: S,
    v0: S,
    cfg: &ShootingConfig<S>,
) -> Result<TrajectoryOutcome<S>> {
    cfg.validate()?;
    params.require_subcritical()?;
    if !(u0 >= S::zero()) || !(v0 >= S::zero()) || !u0.is_finite() || !v0.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "initial heights must be finite and nonnegative, got ({u0}, {v0})"
        )));
    }
    if u0 == S::zero() && v0 == S::zero() {
        // The zero profile is an equilibrium: nothing to integrate.
        let zeros = vec![S::zero(); 2];
        let profile = RadialProfile::from_samples(
            *params,
            vec![cfg.r_start, cfg.r_max],
            zeros.clone(),
            zeros.clone(),
            zeros.clone(),
            zeros,
        )?;
        return Ok(TrajectoryOutcome { kind: OutcomeKind::Indeterminate, event_radius: None, profile });
    }
    let y0 = taylor_start(f, params, u0, v0, cfg.r_start);
    integrate_from_state(f, params, cfg.r_start, y0, u0.max(v0), cfg)
}

/// Like [`integrate`] but starting from an explicit state at radius `r0`.
/// `scale_ref` anchors the blowup and decay thresholds, normally the
/// maximum of the original shot heights.
pub(crate) fn integrate_from_state<S: Scalar>(
    f: &Nonlinearity<S>,
    params: &Parameters<S>,
    r0: S,
    y0: [S; 4],
    scale_ref: S,
    cfg: &ShootingConfig<S>,
) -> Result<TrajectoryOutcome<S>> {
    let mut grid = Vec::new();
    let mut u = Vec::new();
    let mut du = Vec::new();
    let mut v = Vec::new();
    let mut dv = Vec::new();
    let end = run_core(f, params, r0, y0, scale_ref, cfg, &mut |r, y| {
        grid.push(r);
        u.push(y[0]);
        du.push(y[1]);
        v.push(y[2]);
        dv.push(y[3]);
    })?;
    let profile = RadialProfile::from_samples(*params, grid, u, du, v, dv)?;
    Ok(TrajectoryOutcome { kind: end.kind, event_radius: end.event_radius, profile })
}

/// A probe run: same dynamics and events as [`integrate`] but nothing is
/// stored beyond summary statistics. Used by the census, where millions of
/// trajectories would otherwise allocate profiles.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ProbeEnd<S: Scalar> {
    pub kind: OutcomeKind,
    pub event_radius: Option<S>,
    pub crossed: Option<Component>,
    pub end_radius: S,
    pub end_state: [S; 4],
    /// Minimum over sampled nodes of `max(u, v, |u'|, |v'|) / scale_ref`.
    pub miss: S,
}

pub(crate) fn probe_from_state<S: Scalar>(
    f: &Nonlinearity<S>,
    params: &Parameters<S>,
    r0: S,
    y0: [S; 4],
    scale_ref: S,
    cfg: &ShootingConfig<S>,
) -> Result<ProbeEnd<S>> {
    run_core(f, params, r0, y0, scale_ref, cfg, &mut |_, _| {})
}

pub(crate) fn probe<S: Scalar>(
    f: &Nonlinearity<S>,
    params: &Parameters<S>,
    u0: S,
    v0: S,
    cfg: &ShootingConfig<S>,
) -> Result<ProbeEnd<S>> {
    let y0 = taylor_start(f, params, u0, v0, cfg.r_start);
    probe_from_state(f, params, cfg.r_start, y0, u0.max(v0), cfg)
}

// FSAL pair: the last a-row doubles as the fifth order weights, so no
// separate b vector is needed.
struct Tableau<S> {
    a: [[S; 6]; 6],
    c: [S; 6],
    e: [S; 7],
}

impl<S: Scalar> Tableau<S> {
    fn dopri5() -> Self {
        let o = S::of;
        Tableau {
            a: [
                [o(1.0 / 5.0), o(0.0), o(0.0), o(0.0), o(0.0), o(0.0)],
                [o(3.0 / 40.0), o(9.0 / 40.0), o(0.0), o(0.0), o(0.0), o(0.0)],
                [o(44.0 / 45.0), o(-56.0 / 15.0), o(32.0 / 9.0), o(0.0), o(0.0), o(0.0)],
                [
                    o(19372.0 / 6561.0),
                    o(-25360.0 / 2187.0),
                    o(64448.0 / 6561.0),
                    o(-212.0 / 729.0),
                    o(0.0),
                    o(0.0),
                ],
                [
                    o(9017.0 / 3168.0),
                    o(-355.0 / 33.0),
                    o(46732.0 / 5247.0),
                    o(49.0 / 176.0),
                    o(-5103.0 / 18656.0),
                    o(0.0),
                ],
                [
                    o(35.0 / 384.0),
                    o(0.0),
                    o(500.0 / 1113.0),
                    o(125.0 / 192.0),
                    o(-2187.0 / 6784.0),
                    o(11.0 / 84.0),
                ],
            ],
            c: [o(1.0 / 5.0), o(3.0 / 10.0), o(4.0 / 5.0), o(8.0 / 9.0), o(1.0), o(1.0)],
            e: [
                o(71.0 / 57600.0),
                o(0.0),
                o(-71.0 / 16695.0),
                o(71.0 / 1920.0),
                o(-17253.0 / 339200.0),
                o(22.0 / 525.0),
                o(-1.0 / 40.0),
            ],
        }
    }
}

fn rhs<S: Scalar>(f: &Nonlinearity<S>, n1: S, r: S, y: &[S; 4]) -> [S; 4] {
    // Fractional powers of negative bases are NaN; within-step excursions
    // below zero are clamped, events stop the trajectory at true crossings.
    let u = y[0].max(S::zero());
    let v = y[2].max(S::zero());
    let fu = f.eval(r, u, v);
    let fv = f.eval(r, v, u);
    let drift = if n1 > S::zero() { n1 / r } else { S::zero() };
    [y[1], -drift * y[1] - fu, y[3], -drift * y[3] - fv]
}

/// One accepted step with endpoint states and exact endpoint slopes: the
/// per-component cubic Hermite interpolant is the dense output.
struct DenseStep<S: Scalar> {
    h: S,
    y0: [S; 4],
    s0: [S; 4],
    y1: [S; 4],
    s1: [S; 4],
}

impl<S: Scalar> DenseStep<S> {
    fn eval(&self, t: S) -> [S; 4] {
        let mut out = [S::zero(); 4];
        for i in 0..4 {
            out[i] = hermite_cubic(self.y0[i], self.s0[i], self.y1[i], self.s1[i], self.h, t).0;
        }
        out
    }

    /// Interior stationary points (in `(0, 1)`) of component `i`'s cubic.
    /// Extrema of any dense component lie here or at the endpoints, so
    /// these are the only interior candidates event scans need.
    fn stationary(&self, i: usize, out: &mut Vec<S>) {
        let h = self.h;
        let (y0, s0, y1, s1) = (self.y0[i], self.s0[i], self.y1[i], self.s1[i]);
        let six = S::of(6.0);
        let a = six * (y0 - y1) + S::of(3.0) * h * (s0 + s1);
        let b = six * (y1 - y0) - h * (S::of(4.0) * s0 + S::of(2.0) * s1);
        let c = h * s0;
        let tiny = S::of(1e-300);
        let push = |out: &mut Vec<S>, t: S| {
            if t > S::zero() && t < S::one() {
                out.push(t);
            }
        };
        if a.abs() < tiny {
            if b.abs() > tiny {
                push(out, -c / b);
            }
            return;
        }
        let disc = b * b - S::of(4.0) * a * c;
        if disc < S::zero() {
            return;
        }
        let sq = disc.sqrt();
        let q = if b >= S::zero() { -(b + sq) / S::of(2.0) } else { -(b - sq) / S::of(2.0) };
        push(out, q / a);
        if q.abs() > tiny {
            push(out, c / q);
        }
    }
}

/// Earliest `t` in `(lo, hi]` where `pred` flips to true; `pred(lo)` must
/// be false, `pred(hi)` true, and `pred` must flip once on the bracket.
fn first_true<S: Scalar>(pred: &dyn Fn(S) -> bool, mut lo: S, mut hi: S, t_tol: S) -> S {
    while hi - lo > t_tol {
        let mid = (lo + hi) / S::of(2.0);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Walks sorted candidates and brackets the first one satisfying `pred`,
/// then bisects. Candidates include every interior stationary point of the
/// dense cubics, so `pred` flips at most once between neighbors.
fn scan_first_true<S: Scalar>(cands: &[S], pred: &dyn Fn(S) -> bool, t_tol: S) -> Option<S> {
    let mut prev = S::zero();
    for &c in cands {
        if pred(c) {
            return Some(first_true(pred, prev, c, t_tol));
        }
        prev = c;
    }
    None
}

fn detect_events<S: Scalar>(
    dense: &DenseStep<S>,
    blow_at: S,
    decay_at: S,
    pinned_u: bool,
    pinned_v: bool,
) -> Option<(S, OutcomeKind, Option<Component>)> {
    let t_tol = (S::of(1e-12) / dense.h).min(S::of(1e-3)).max(S::of(1e-15));
    let mut cands: Vec<S> = Vec::with_capacity(16);
    for i in 0..4 {
        dense.stationary(i, &mut cands);
    }
    for j in 1..=8 {
        cands.push(S::of(j as f64 / 8.0));
    }
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best: Option<(S, OutcomeKind, Option<Component>)> = None;
    let mut consider = |t: Option<S>, kind: OutcomeKind, comp: Option<Component>| {
        if let Some(t) = t {
            if best.map_or(true, |(bt, _, _)| t < bt) {
                best = Some((t, kind, comp));
            }
        }
    };

    for (idx, comp, pinned) in [(0usize, Component::U, pinned_u), (2, Component::V, pinned_v)] {
        if pinned || dense.y0[idx] <= S::zero() {
            continue;
        }
        let pred = |t: S| dense.eval(t)[idx] <= S::zero();
        consider(scan_first_true(&cands, &pred, t_tol), OutcomeKind::ZeroCrossing, Some(comp));
    }
    {
        let pred = |t: S| {
            let y = dense.eval(t);
            y[0].max(y[2]) >= blow_at
        };
        consider(scan_first_true(&cands, &pred, t_tol), OutcomeKind::Blowup, None);
    }
    if decay_at > S::zero() {
        let pred = |t: S| {
            let y = dense.eval(t);
            let mag = y[0].max(y[2]).max(y[1].abs()).max(y[3].abs());
            mag < decay_at && y[1] <= S::zero() && y[3] <= S::zero()
        };
        consider(scan_first_true(&cands, &pred, t_tol), OutcomeKind::Decay, None);
    }
    best
}

fn run_core<S: Scalar>(
    f: &Nonlinearity<S>,
    params: &Parameters<S>,
    r0: S,
    y0: [S; 4],
    scale_ref: S,
    cfg: &ShootingConfig<S>,
    on_node: &mut dyn FnMut(S, [S; 4]),
) -> Result<ProbeEnd<S>> {
    let tableau: Tableau<S> = Tableau::dopri5();
    let n1 = S::of(params.n as f64) - S::one();
    let blow_at = cfg.blowup_factor * scale_ref.max(S::one());
    let decay_at = cfg.decay_floor * scale_ref;
    let pinned_u = y0[0] == S::zero() && y0[1] == S::zero();
    let pinned_v = y0[2] == S::zero() && y0[3] == S::zero();
    let h_max = S::one().min(cfg.r_max / S::of(20.0));
    let tol = cfg.tol;

    let node_mag = |y: &[S; 4]| y[0].max(y[2]).max(y[1].abs()).max(y[3].abs());
    let mut miss = node_mag(&y0) / scale_ref;

    let mut r = r0;
    let mut y = y0;
    let mut k: [[S; 4]; 7] = [[S::zero(); 4]; 7];
    k[0] = rhs(f, n1, r, &y);
    on_node(r, y);

    let mut h = S::of(1e-3).min(h_max).min(cfg.r_max - r0);
    let mut accepted: usize = 0;
    loop {
        if cfg.r_max - r <= S::of(1e-12) * cfg.r_max.max(S::one()) {
            return Ok(ProbeEnd {
                kind: OutcomeKind::Indeterminate,
                event_radius: None,
                crossed: None,
                end_radius: r,
                end_state: y,
                miss,
            });
        }
        h = h.min(cfg.r_max - r);
        if h < S::of(1e-13) * r.max(S::one()) {
            return Err(Error::Stiffness { radius: r.as_f64() });
        }

        // Stages 2..7; the stage-7 argument is the fifth order solution.
        let mut y_new = y;
        for s in 0..6 {
            let mut arg = y;
            for i in 0..4 {
                let mut acc = S::zero();
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    acc = acc + tableau.a[s][j] * kj[i];
                }
                arg[i] = y[i] + h * acc;
            }
            if s == 5 {
                y_new = arg;
            }
            k[s + 1] = rhs(f, n1, r + tableau.c[s] * h, &arg);
        }
        let mut err_sq = S::zero();
        for i in 0..4 {
            let mut acc = S::zero();
            for (j, kj) in k.iter().enumerate() {
                acc = acc + tableau.e[j] * kj[i];
            }
            let sc = tol + tol * y[i].abs().max(y_new[i].abs());
            let q = h * acc / sc;
            err_sq = err_sq + q * q;
        }
        let err = (err_sq / S::of(4.0)).sqrt();

        if err.is_finite() && err <= S::one() {
            let dense = DenseStep { h, y0: y, s0: k[0], y1: y_new, s1: k[6] };
            if let Some((t, kind, crossed)) = detect_events(&dense, blow_at, decay_at, pinned_u, pinned_v) {
                let r_event = r + t * h;
                let (r_event, y_event) = if r_event >= r + h - S::of(1e-12) {
                    (r + h, y_new)
                } else {
                    (r_event, dense.eval(t))
                };
                miss = miss.min(node_mag(&y_event) / scale_ref);
                on_node(r_event, y_event);
                return Ok(ProbeEnd {
                    kind,
                    event_radius: Some(r_event),
                    crossed,
                    end_radius: r_event,
                    end_state: y_event,
                    miss,
                });
            }
            r = r + h;
            y = y_new;
            k[0] = k[6];
            miss = miss.min(node_mag(&y) / scale_ref);
            on_node(r, y);
            accepted += 1;
            if accepted > 4_000_000 {
                return Err(Error::Stiffness { radius: r.as_f64() });
            }
            let fac = (S::of(0.9) * err.powf(S::of(-0.2))).min(S::of(5.0)).max(S::of(0.2));
            h = (h * fac).min(h_max);
        } else if err.is_finite() {
            let fac = (S::of(0.9) * err.powf(S::of(-0.2))).min(S::one()).max(S::of(0.2));
            h = h * fac;
        } else {
            h = h * S::of(0.2);
        }
    }
}

/// Fixed-step fifth order integration with no events or error control;
/// used for step-size convergence studies.
#[cfg(test)]
pub(crate) fn rk_fixed<S: Scalar>(
    f: &Nonlinearity<S>,
    params: &Parameters<S>,
    r0: S,
    y0: [S; 4],
    r1: S,
    steps: usize,
) -> [S; 4] {
    let tableau: Tableau<S> = Tableau::dopri5();
    let n1 = S::of(params.n as f64) - S::one();
    let h = (r1 - r0) / S::of(steps as f64);
    let mut y = y0;
    let mut r = r0;
    let mut k: [[S; 4]; 7] = [[S::zero(); 4]; 7];
    for step in 0..steps {
        k[0] = rhs(f, n1, r, &y);
        let mut y_new = y;
        for s in 0..6 {
            let mut arg = y;
            for i in 0..4 {
                let mut acc = S::zero();
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    acc = acc + tableau.a[s][j] * kj[i];
                }
                arg[i] = y[i] + h * acc;
            }
            if s == 5 {
                y_new = arg;
            }
            k[s + 1] = rhs(f, n1, r + tableau.c[s] * h, &arg);
        }
        y = y_new;
        r = r0 + S::of((step + 1) as f64) * h;
    }
    y
}

/// Largest per-interval defect between the increment of the weighted
/// Wronskian `W(r) = r^(n-1) (u'v - v'u)` and the integral of its exact
/// derivative `r^(n-1) (f(r,v,u) u - f(r,u,v) v)` along the profile.
pub fn wronskian_consistency<S: Scalar>(
    f: &Nonlinearity<S>,
    profile: &RadialProfile<S>,
) -> Result<S> {
    let n1 = S::of(profile.params().n as f64) - S::one();
    let grid = profile.grid();
    let w_at = |i: usize| {
        grid[i].powf(n1) * (profile.du()[i] * profile.v()[i] - profile.dv()[i] * profile.u()[i])
    };
    let integrand = |r: S| {
        let [u, _, v, _] = profile.eval(r).expect("quadrature stays inside the grid");
        let (uc, vc) = (u.max(S::zero()), v.max(S::zero()));
        r.powf(n1) * (f.eval(r, vc, uc) * uc - f.eval(r, uc, vc) * vc)
    };
    let mut w_scale = S::zero();
    for i in 0..profile.len() {
        w_scale = w_scale.max(w_at(i).abs());
    }
    let quad_tol = S::of(1e-13) * (S::one() + w_scale);
    let mut worst = S::zero();
    for i in 0..profile.len() - 1 {
        let lhs = w_at(i + 1) - w_at(i);
        let rhs = adaptive_simpson(&integrand, grid[i], grid[i + 1], quad_tol);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GrowthBound;

    fn coupled(n: u32, q: f64, b: f64) -> (Nonlinearity<f64>, Parameters<f64>) {
        let p = Parameters::new(n, q, b).unwrap();
        (Nonlinearity::coupled_power(&p), p)
    }

    fn linear(n: u32, sign: f64) -> (Nonlinearity<f64>, Parameters<f64>) {
        // f = sign * z1, decoupled; growth certificate is nominal.
        let p = Parameters::new(n, 2.0, 0.0).unwrap();
        let f = Nonlinearity::from_fn("linear", GrowthBound::new(2.0, 2.0).unwrap(), move |_, z1, _| {
            sign * z1
        });
        (f, p)
    }

    #[test]
    fn config_defaults_validate() {
        let cfg = ShootingConfig::<f64>::default();
        assert!(cfg.validate().is_ok());
        assert!((cfg.r_max - 70.71067811865476).abs() < 1e-12);
        let mut bad = cfg;
        bad.tol = 0.0;
        assert!(bad.validate().is_err());
        bad = cfg;
        bad.r_max = cfg.r_start;
        assert!(bad.validate().is_err());
        bad = cfg;
        bad.decay_floor = 1.5;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn taylor_start_matches_series() {
        let (f, p) = coupled(3, 2.0, 1.0);
        // f(0, 2, 2) = -2 + 8 + 8 = 14.
        let rs = 1e-2;
        let y = taylor_start(&f, &p, 2.0, 2.0, rs);
        assert!((y[0] - (2.0 - 14.0 * rs * rs / 6.0)).abs() < 1e-16);
        assert!((y[1] + 14.0 * rs / 3.0).abs() < 1e-16);
        assert_eq!(y[0], y[2]);
        assert_eq!(y[1], y[3]);
    }

    #[test]
    fn cosine_crossing_located_precisely() {
        // f = +z1 and n = 1 make each component u'' = -u, so the shot from
        // height 1 is cos(r) up to the O(r_s^4) start truncation.
        let (f, p) = linear(1, 1.0);
        let cfg = ShootingConfig { r_max: 10.0, ..ShootingConfig::default() };
        let out = integrate(&f, &p, 1.0, 1.0, &cfg).unwrap();
        assert_eq!(out.kind, OutcomeKind::ZeroCrossing);
        let r_e = out.event_radius.unwrap();
        assert!(
            (r_e - std::f64::consts::FRAC_PI_2).abs() < 1e-7,
            "crossing at {r_e}, want pi/2"
        );
        let last = out.profile.final_state();
        assert!(last[0].abs() < 1e-9, "u at crossing should vanish, got {}", last[0]);
        assert_eq!(out.profile.r_end(), r_e);
    }

    #[test]
    fn exponential_growth_triggers_blowup() {
        // f = -z1 gives u'' = u, so the shot from height 1 is cosh(r).
        let (f, p) = linear(1, -1.0);
        let cfg = ShootingConfig { r_max: 20.0, ..ShootingConfig::default() };
        let out = integrate(&f, &p, 1.0, 1.0, &cfg).unwrap();
        assert_eq!(out.kind, OutcomeKind::Blowup);
        let r_e = out.event_radius.unwrap();
        let want = (1000.0f64 + (1000.0f64 * 1000.0 - 1.0).sqrt()).ln(); // acosh(1000)
        assert!((r_e - want).abs() < 1e-5, "blowup at {r_e}, want {want}");
        let last = out.profile.final_state();
        assert!((last[0] - 1000.0).abs() < 1e-3 * 1000.0);
    }

    #[test]
    fn decaying_mode_triggers_decay_event() {
        // Start exactly on the decaying branch e^{-r} of u'' = u. The
        // growing mode is seeded only by integration error, so a tight
        // tolerance keeps it below the decay floor until the event.
        let (f, p) = linear(1, -1.0);
        let cfg = ShootingConfig { r_max: 40.0, tol: 1e-12, ..ShootingConfig::default() };
        let r0: f64 = 0.01;
        let a = (-r0).exp();
        let y0 = [a, -a, a, -a];
        let out = integrate_from_state(&f, &p, r0, y0, 1.0, &cfg).unwrap();
        assert_eq!(out.kind, OutcomeKind::Decay);
        let r_e = out.event_radius.unwrap();
        let want = (1e5f64).ln();
        assert!((r_e - want).abs() < 0.05, "decay at {r_e}, want {want}");
        // The tail is monotone nonincreasing.
        let u = out.profile.u();
        for i in 1..u.len() {
            assert!(u[i] <= u[i - 1] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn subthreshold_shot_is_indeterminate() {
        let (f, p) = coupled(1, 2.0, 1.0);
        let cfg = ShootingConfig { r_max: 30.0, ..ShootingConfig::default() };
        let out = integrate(&f, &p, 0.5, 0.5, &cfg).unwrap();
        assert_eq!(out.kind, OutcomeKind::Indeterminate);
        assert!(out.event_radius.is_none());
        assert!((out.profile.r_end() - 30.0).abs() < 1e-9);
        assert!(out.profile.u().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn zero_heights_give_zero_profile() {
        let (f, p) = coupled(1, 2.0, 1.0);
        let out = integrate(&f, &p, 0.0, 0.0, &ShootingConfig::default()).unwrap();
        assert_eq!(out.kind, OutcomeKind::Indeterminate);
        assert!(out.profile.u().iter().all(|&x| x == 0.0));
        assert!(integrate(&f, &p, -1.0, 0.5, &ShootingConfig::default()).is_err());
    }

    #[test]
    fn swap_equivariance_is_exact() {
        let (f, p) = coupled(1, 2.0, 2.0);
        let cfg = ShootingConfig { r_max: 20.0, ..ShootingConfig::default() };
        let a = integrate(&f, &p, 1.3, 0.7, &cfg).unwrap();
        let b = integrate(&f, &p, 0.7, 1.3, &cfg).unwrap();
        assert_eq!(a.kind, b.kind);
        assert_eq!(a.event_radius, b.event_radius);
        assert_eq!(a.profile.grid(), b.profile.grid());
        assert_eq!(a.profile.u(), b.profile.v());
        assert_eq!(a.profile.du(), b.profile.dv());
        assert_eq!(a.profile.v(), b.profile.u());
    }

    #[test]
    fn pinned_component_stays_zero() {
        let (f, p) = coupled(1, 2.0, 2.0);
        let cfg = ShootingConfig { r_max: 15.0, ..ShootingConfig::default() };
        let out = integrate(&f, &p, 0.0, 2.0, &cfg).unwrap();
        assert!(out.profile.u().iter().all(|&x| x == 0.0));
        assert!(out.profile.du().iter().all(|&x| x == 0.0));
        // v alone sees the scalar equation and its height 2.0 is above the
        // scalar critical height sqrt(2), so it must cross zero.
        assert_eq!(out.kind, OutcomeKind::ZeroCrossing);
    }

    #[test]
    fn finite_time_singularity_reports_stiffness() {
        // f = -z1^3 gives u'' = u^3: finite-radius blowup. With the blowup
        // threshold pushed out of reach the step controller underflows.
        let p = Parameters::new(1, 2.0, 0.0).unwrap();
        let f = Nonlinearity::from_fn("cubic growth", GrowthBound::new(1.0, 3.0).unwrap(), |_, z1, _| {
            -z1 * z1 * z1
        });
        let cfg = ShootingConfig {
            r_max: 10.0,
            blowup_factor: 1e15,
            tol: 1e-10,
            ..ShootingConfig::default()
        };
        match integrate(&f, &p, 2.0, 2.0, &cfg) {
            Err(Error::Stiffness { radius }) => assert!(radius > 0.0 && radius < 10.0),
            other => panic!("expected stiffness, got {other:?}"),
        }
    }

    #[test]
    fn fixed_step_converges_at_fifth_order() {
        // u'' = -u on [0, pi/3] from (1, 0): u = cos(r). Halving the step
        // must cut the endpoint error by about 2^5.
        let (f, p) = linear(1, 1.0);
        let y0 = [1.0, 0.0, 1.0, 0.0];
        let end = std::f64::consts::FRAC_PI_3;
        let err = |steps: usize| {
            let y = rk_fixed(&f, &p, 0.0, y0, end, steps);
            (y[0] - 0.5).abs()
        };
        let (e16, e32, e64) = (err(16), err(32), err(64));
        let r1 = e16 / e32;
        let r2 = e32 / e64;
        assert!(e64 > 1e-15, "error hit roundoff, weaken the test setup");
        assert!((20.0..50.0).contains(&r1), "ratio {r1} not near 32 (e16={e16:.3e}, e32={e32:.3e})");
        assert!((20.0..50.0).contains(&r2), "ratio {r2} not near 32 (e32={e32:.3e}, e64={e64:.3e})");
    }

    #[test]
    fn wronskian_defect_small_on_asymmetric_shot() {
        let (f, p) = coupled(2, 2.0, 2.0);
        let cfg = ShootingConfig { r_max: 15.0, ..ShootingConfig::default() };
        let out = integrate(&f, &p, 1.5, 0.8, &cfg).unwrap();
        let defect = wronskian_consistency(&f, &out.profile).unwrap();
        assert!(defect < 1e-6, "wronskian defect {defect}");
        // Symmetric shots have identically zero Wronskian.
        let sym = integrate(&f, &p, 1.2, 1.2, &cfg).unwrap();
        let d_sym = wronskian_consistency(&f, &sym.profile).unwrap();
        assert!(d_sym < 1e-12, "symmetric defect {d_sym}");
    }
}
