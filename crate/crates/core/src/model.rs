//! Problem data: parameters, growth/decay certificates, and the coupling
//! nonlinearity with its optional additive split.
//!
//! The radial system solved throughout the crate is
//!
//! ```text
//! -u'' - (n-1)/r u' = f(r, u, v)
//! -v'' - (n-1)/r v' = f(r, v, u)
//! ```
//!
//! with the same scalar function `f` driving both components. `f` is only
//! evaluated on nonnegative arguments; fractional powers make negative bases
//! meaningless, and the integrator stops trajectories at zero crossings.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::scalar::Scalar;

/// Dimension and coupled-power parameters `(n, q, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters<S: Scalar> {
    /// Space dimension, `n >= 1`.
    pub n: u32,
    /// Half the power; self-interaction is `z^(2q-1)`, coupling `z1^(q-1) z2^q`.
    pub q: S,
    /// Coupling strength in front of the mixed term.
    pub b: S,
}

impl<S: Scalar> Parameters<S> {
    pub fn new(n: u32, q: S, b: S) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameters("dimension n must be >= 1".into()));
        }
        if !(q > S::one()) || !q.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "exponent q must satisfy q > 1, got {q}"
            )));
        }
        if !b.is_finite() {
            return Err(Error::InvalidParameters(format!("coupling b must be finite, got {b}")));
        }
        Ok(Parameters { n, q, b })
    }

    /// Subcritical exponent window: any `q > 1` for `n <= 2`, and
    /// `q < n/(n-2)` for `n >= 3`. Solver entry points require this.
    pub fn subcritical(&self) -> bool {
        if self.n <= 2 {
            return true;
        }
        let n = S::of(self.n as f64);
        self.q < n / (n - S::of(2.0))
    }

    pub fn require_subcritical(&self) -> Result<()> {
        if self.subcritical() {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!(
                "(n, q) = ({}, {}) lies outside the subcritical window",
                self.n, self.q
            )))
        }
    }
}

/// Growth certificate `|f(r, z1, z2)| <= C (z1 + z2)^p` for large arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBound<S: Scalar> {
    pub c: S,
    pub p: S,
}

impl<S: Scalar> GrowthBound<S> {
    pub fn new(c: S, p: S) -> Result<Self> {
        if !(c > S::zero()) || !(p > S::one()) {
            return Err(Error::InvalidParameters(format!(
                "growth bound needs C > 0 and p > 1, got C = {c}, p = {p}"
            )));
        }
        Ok(GrowthBound { c, p })
    }
}

/// Decay certificate: rate floor `m`, onset radius `R`, and neighborhood
/// size `eps` on which the near-zero quotient bounds are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate<S: Scalar> {
    pub m: S,
    #[serde(rename = "R")]
    pub onset_radius: S,
    pub eps: S,
}

impl<S: Scalar> DecayCertificate<S> {
    pub fn new(m: S, onset_radius: S, eps: S) -> Result<Self> {
        if !(m > S::zero()) || !(onset_radius > S::zero()) || !(eps > S::zero()) {
            return Err(Error::InvalidParameters(
                "decay certificate needs m > 0, R > 0, eps > 0".into(),
            ));
        }
        Ok(DecayCertificate { m, onset_radius, eps })
    }
}

impl<S: Scalar> Default for DecayCertificate<S> {
    fn default() -> Self {
        DecayCertificate { m: S::of(0.5), onset_radius: S::one(), eps: S::of(0.1) }
    }
}

/// Which named family a nonlinearity came from; drives serialization and
/// lets the classifier cross-check sampled evidence against closed forms.
#[derive(Debug, Clone, PartialEq)]
pub enum Family<S: Scalar> {
    /// `f(r, z1, z2) = -z1 + z1^(2q-1) + b z1^(q-1) z2^q`.
    CoupledPower(Parameters<S>),
    /// `f(r, z1, z2) = -z1 - z1^(2q-1) + beta z1^(q-1) z2^q`, the target of
    /// the four-parameter rescaling in [`crate::families`].
    BetaCoupled { q: S, beta: S },
    /// Caller-supplied black-box evaluator.
    Custom(String),
}

type EvalFn<S> = Arc<dyn Fn(S, S, S) -> S + Send + Sync>;
type SplitGFn<S> = Arc<dyn Fn(S, S) -> S + Send + Sync>;

/// Additive split `f(r, z1, z2) = g(r, z1) + h(r, z1, z2) z2` with `h`
/// symmetric in `(z1, z2)`; `g_r` is the partial derivative of `g` in `r`.
#[derive(Clone)]
pub struct Split<S: Scalar> {
    g: SplitGFn<S>,
    g_r: SplitGFn<S>,
    h: EvalFn<S>,
}

impl<S: Scalar> Split<S> {
    pub fn new(
        g: impl Fn(S, S) -> S + Send + Sync + 'static,
        g_r: impl Fn(S, S) -> S + Send + Sync + 'static,
        h: impl Fn(S, S, S) -> S + Send + Sync + 'static,
    ) -> Self {
        Split { g: Arc::new(g), g_r: Arc::new(g_r), h: Arc::new(h) }
    }

    pub fn g(&self, r: S, z: S) -> S {
        (self.g)(r, z)
    }

    pub fn g_r(&self, r: S, z: S) -> S {
        (self.g_r)(r, z)
    }

    pub fn h(&self, r: S, z1: S, z2: S) -> S {
        (self.h)(r, z1, z2)
    }
}

/// The coupling nonlinearity: a black-box evaluator plus a growth bound,
/// an optional additive split, and family metadata.
#[derive(Clone)]
pub struct Nonlinearity<S: Scalar> {
    eval: EvalFn<S>,
    split: Option<Split<S>>,
    growth: GrowthBound<S>,
    family: Family<S>,
}

impl<S: Scalar> fmt::Debug for Nonlinearity<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("family", &self.family)
            .field("growth", &self.growth)
            .field("split", &self.split.is_some())
            .finish()
    }
}

impl<S: Scalar> Nonlinearity<S> {
    /// Coupled power family `-z1 + z1^(2q-1) + b z1^(q-1) z2^q`.
    pub fn coupled_power(params: &Parameters<S>) -> Self {
        let q = params.q;
        let b = params.b;
        let p_self = S::of(2.0) * q - S::one();
        let p_mix = q - S::one();
        let eval = move |_r: S, z1: S, z2: S| {
            -z1 + z1.powf(p_self) + b * z1.powf(p_mix) * z2.powf(q)
        };
        let g = move |_r: S, z: S| -z + z.powf(p_self);
        let g_r = |_r: S, _z: S| S::zero();
        let h = move |_r: S, z1: S, z2: S| b * (z1 * z2).powf(p_mix);
        let growth = GrowthBound {
            c: S::one().max(S::one() + b.abs()),
            p: p_self,
        };
        Nonlinearity {
            eval: Arc::new(eval),
            split: Some(Split::new(g, g_r, h)),
            growth,
            family: Family::CoupledPower(*params),
        }
    }

    /// Defocusing-self variant `-z1 - z1^(2q-1) + beta z1^(q-1) z2^q`; its
    /// symmetric states exist for `beta > 1`.
    pub fn beta_coupled(q: S, beta: S) -> Result<Self> {
        if !(q > S::one()) || !(beta > S::zero()) {
            return Err(Error::InvalidParameters(format!(
                "beta-coupled family needs q > 1 and beta > 0, got q = {q}, beta = {beta}"
            )));
        }
        let p_self = S::of(2.0) * q - S::one();
        let p_mix = q - S::one();
        let eval = move |_r: S, z1: S, z2: S| {
            -z1 - z1.powf(p_self) + beta * z1.powf(p_mix) * z2.powf(q)
        };
        let g = move |_r: S, z: S| -z - z.powf(p_self);
        let g_r = |_r: S, _z: S| S::zero();
        let h = move |_r: S, z1: S, z2: S| beta * (z1 * z2).powf(p_mix);
        let growth = GrowthBound { c: S::one() + beta, p: p_self };
        Ok(Nonlinearity {
            eval: Arc::new(eval),
            split: Some(Split::new(g, g_r, h)),
            growth,
            family: Family::BetaCoupled { q, beta },
        })
    }

    /// Wraps a caller-supplied evaluator. The caller is responsible for
    /// local Lipschitz continuity on compact subsets of the closed first
    /// quadrant; the solvers assume it and cannot verify a black box.
    pub fn from_fn(
        name: impl Into<String>,
        growth: GrowthBound<S>,
        eval: impl Fn(S, S, S) -> S + Send + Sync + 'static,
    ) -> Self {
        Nonlinearity {
            eval: Arc::new(eval),
            split: None,
            growth,
            family: Family::Custom(name.into()),
        }
    }

    /// Attaches an additive split to a custom nonlinearity.
    pub fn with_split(mut self, split: Split<S>) -> Self {
        self.split = Some(split);
        self
    }

    /// Evaluates `f(r, z1, z2)`. Arguments must be nonnegative.
    pub fn eval(&self, r: S, z1: S, z2: S) -> S {
        debug_assert!(
            z1 >= S::zero() && z2 >= S::zero(),
            "nonlinearity evaluated on negative base: z1 = {z1}, z2 = {z2}"
        );
        (self.eval)(r, z1, z2)
    }

    pub fn split(&self) -> Option<&Split<S>> {
        self.split.as_ref()
    }

    pub fn growth(&self) -> &GrowthBound<S> {
        &self.growth
    }

    pub fn family(&self) -> &Family<S> {
        &self.family
    }

    /// JSON description of the nonlinearity, `{n, q, b, family}` for the
    /// coupled power family.
    pub fn spec_json(&self) -> serde_json::Value {
        match &self.family {
            Family::CoupledPower(p) => serde_json::json!({
                "n": p.n,
                "q": p.q.as_f64(),
                "b": p.b.as_f64(),
                "family": "coupled_power",
            }),
            Family::BetaCoupled { q, beta } => serde_json::json!({
                "q": q.as_f64(),
                "beta": beta.as_f64(),
                "family": "beta_coupled",
            }),
            Family::Custom(name) => serde_json::json!({ "family": name }),
        }
    }
}

/// Sup over interior grid points of the pointwise equation defect
///
/// ```text
/// |-u'' - (n-1)/r u' - f(r,u,v)| + |-v'' - (n-1)/r v' - f(r,v,u)|
/// ```
///
/// Second derivatives come from a degree-7 interpolant through the stored
/// `(value, derivative)` pairs of a sliding 4-node window, so on smooth data
/// the differentiation error is O(h^6) and the defect of an accurately
/// integrated trajectory sits near the integrator tolerance rather than the
/// much larger O(h^2) a plain cubic Hermite second derivative would give.
pub fn residual<S: Scalar>(f: &Nonlinearity<S>, profile: &RadialProfile<S>) -> Result<S> {
    residual_pair(f, f, profile)
}

/// Like [`residual`], but for systems whose two equations carry different
/// right-hand sides: the first equation is checked against `f_u(r, u, v)`
/// and the second against `f_v(r, v, u)`.
pub fn residual_pair<S: Scalar>(
    f_u: &Nonlinearity<S>,
    f_v: &Nonlinearity<S>,
    profile: &RadialProfile<S>,
) -> Result<S> {
    let len = profile.len();
    if len < 4 {
        return Err(Error::MalformedProfile(format!(
            "residual needs at least 4 grid points, profile has {len}"
        )));
    }
    if !(profile.r0() > S::zero()) {
        return Err(Error::MalformedProfile("residual needs a grid starting at r > 0".into()));
    }
    let n1 = S::of(profile.params().n as f64) - S::one();
    let mut sup = S::zero();
    for i in 1..len - 1 {
        let lo = i.saturating_sub(1).min(len - 4);
        let r = profile.grid()[i];
        let ddu = hermite_window_d2(profile.grid(), profile.u(), profile.du(), lo, r);
        let ddv = hermite_window_d2(profile.grid(), profile.v(), profile.dv(), lo, r);
        let u = profile.u()[i].max(S::zero());
        let v = profile.v()[i].max(S::zero());
        let res_u = -ddu - n1 / r * profile.du()[i] - f_u.eval(r, u, v);
        let res_v = -ddv - n1 / r * profile.dv()[i] - f_v.eval(r, v, u);
        let total = res_u.abs() + res_v.abs();
        if total > sup {
            sup = total;
        }
    }
    Ok(sup)
}

/// Second derivative at `x` of the degree-7 interpolant matching value and
/// first derivative at the 4 nodes `grid[lo..lo+4]` (Hermite data, built by
/// generalized divided differences with doubled abscissae).
pub(crate) fn hermite_window_d2<S: Scalar>(grid: &[S], y: &[S], dy: &[S], lo: usize, x: S) -> S {
    let mut z = [S::zero(); 8];
    let mut c = [S::zero(); 8];
    // Divided difference table on doubled nodes; first-order entries at a
    // repeated node are the supplied derivatives.
    let mut table = [S::zero(); 8];
    for j in 0..4 {
        z[2 * j] = grid[lo + j];
        z[2 * j + 1] = grid[lo + j];
        table[2 * j] = y[lo + j];
        table[2 * j + 1] = y[lo + j];
    }
    c[0] = table[0];
    for order in 1..8 {
        for i in (order..8).rev() {
            table[i] = if z[i] == z[i - order] {
                debug_assert!(order == 1);
                dy[lo + i / 2]
            } else {
                (table[i] - table[i - 1]) / (z[i] - z[i - order])
            };
        }
        c[order] = table[order];
    }
    // Newton-form Horner evaluating p, p', p'' together.
    let two = S::of(2.0);
    let mut p = c[7];
    let mut dp = S::zero();
    let mut d2p = S::zero();
    for i in (0..7).rev() {
        let w = x - z[i];
        d2p = d2p * w + two * dp;
        dp = dp * w + p;
        p = p * w + c[i];
    }
    d2p
}
