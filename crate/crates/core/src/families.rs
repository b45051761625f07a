//! Explicit solution families built from a scalar ground state, and the
//! Ma-Zhao parameter transformations between sign-flipped coupled systems
//! and the beta-normalized one.
//!
//! Construction is pure scaling on the ground-state grid: the equations are
//! autonomous apart from the (n-1)/r drift, which component scaling leaves
//! untouched, so scaled samples and derivatives stay consistent.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::GroundState;
use crate::model::{residual, GrowthBound, Nonlinearity, Parameters};
use crate::profile::RadialProfile;
use crate::regimes::PsiAnalysis;
use crate::scalar::Scalar;

fn rescale<S: Scalar>(
    target: Parameters<S>,
    src: &RadialProfile<S>,
    cu: S,
    cv: S,
) -> Result<RadialProfile<S>> {
    RadialProfile::from_samples(
        target,
        src.grid().to_vec(),
        src.u().iter().map(|&x| cu * x).collect(),
        src.du().iter().map(|&x| cu * x).collect(),
        src.v().iter().map(|&x| cv * x).collect(),
        src.dv().iter().map(|&x| cv * x).collect(),
    )
}

/// The symmetric pair `u = v = (1+b)^(-1/(2q-2)) u_0` attached to coupling
/// strength `b > -1`. The algebra is exact: the rescaled diagonal turns the
/// coupled system back into the scalar equation the ground state solves, so
/// the residual inherits the ground state's up to the scale factor.
pub fn make_symmetric<S: Scalar>(ground: &GroundState<S>, b: S) -> Result<RadialProfile<S>> {
    if !(S::one() + b > S::zero()) {
        return Err(Error::InvalidParameters(format!(
            "symmetric pair needs 1 + b > 0, got b = {b}"
        )));
    }
    let q = ground.params.q;
    let params = Parameters::new(ground.params.n, q, b)?;
    let c = (S::one() + b).powf(-S::one() / (S::of(2.0) * q - S::of(2.0)));
    rescale(params, &ground.profile, c, c)
}

/// The three known solutions in a multiplicity regime, plus the residual
/// bookkeeping that justifies them.
#[derive(Debug, Clone)]
pub struct Triple<S: Scalar> {
    /// Symmetric pair, the asymmetric pair `(mu_b u_0, mu_b k_b u_0)`, and
    /// its swap, in that order.
    pub members: [RadialProfile<S>; 3],
    /// System residual of each member, computed rather than trusted.
    pub residuals: [S; 3],
    /// Residual of the literal unscaled diagonal `(u_0, u_0)` against the
    /// same coupled system. It is large for b > 0; recorded so the
    /// normalization choice for the first member stays auditable.
    pub unscaled_first_residual: S,
    pub note: String,
}

/// Builds the three-solution family `(c u_0, c u_0)`, `(mu_b u_0, mu_b k_b u_0)`
/// and its swap, where `c = (1+b)^(-1/(2q-2))` and `k_b` is the interior
/// root found by the sign analysis. One-dimensional only.
pub fn make_triple<S: Scalar>(
    ground: &GroundState<S>,
    params: &Parameters<S>,
    analysis: &PsiAnalysis<S>,
) -> Result<Triple<S>> {
    if params.n != 1 {
        return Err(Error::Regime {
            required: "n = 1 with an interior root of the coupling polynomial".into(),
            found: format!("n = {}", params.n),
        });
    }
    let (kb, mu) = match (analysis.root, analysis.mu_b) {
        (Some(k), Some(m)) => (k, m),
        _ => {
            return Err(Error::Regime {
                required: "an interior root of the coupling polynomial (multiplicity regime)"
                    .into(),
                found: format!("sign pattern {:?} with no root", analysis.sign_on_01),
            })
        }
    };
    let q = params.q;
    if (q - ground.params.q).abs() > S::of(1e-12) * q.abs() {
        return Err(Error::InconsistentParameters(format!(
            "ground state was solved at q = {} but the coupled system has q = {q}",
            ground.params.q
        )));
    }
    let f = Nonlinearity::coupled_power(params);
    let c = (S::one() + params.b).powf(-S::one() / (S::of(2.0) * q - S::of(2.0)));
    let symmetric = rescale(*params, &ground.profile, c, c)?;
    let asym = rescale(*params, &ground.profile, mu, mu * kb)?;
    let swapped = asym.swap();
    let residuals = [
        residual(&f, &symmetric)?,
        residual(&f, &asym)?,
        residual(&f, &swapped)?,
    ];
    let unscaled = residual(&f, &ground.profile)?;
    let note = format!(
        "symmetric member carries the (1+b)^(-1/(2q-2)) normalization; the literal unscaled \
         diagonal (u0, u0) leaves residual {:.3e} against the same coupled system",
        unscaled.as_f64()
    );
    Ok(Triple { members: [symmetric, asym, swapped], residuals, unscaled_first_residual: unscaled, note })
}

/// One member `(cos(theta) u_0, sin(theta) u_0)` of the solution circle that
/// exists exactly at `q = 2, b = 1`, where the coupling absorbs any split of
/// the cubic power between the components.
pub fn make_theta_family<S: Scalar>(
    ground: &GroundState<S>,
    theta: S,
) -> Result<RadialProfile<S>> {
    let two = S::of(2.0);
    if (ground.params.q - two).abs() > S::of(1e-12) {
        return Err(Error::Regime {
            required: "q = 2, b = 1 (the continuum-family point)".into(),
            found: format!("q = {}", ground.params.q),
        });
    }
    let half_pi = S::of(std::f64::consts::FRAC_PI_2);
    if !(theta > S::zero() && theta < half_pi) {
        return Err(Error::InvalidParameters(format!(
            "theta must lie strictly inside (0, pi/2), got {theta}"
        )));
    }
    let (cu, cv) = (theta.cos(), theta.sin());
    let floor = S::of(1e-3);
    if cu.min(cv) * ground.height < floor {
        log::warn!(
            "theta = {theta} pushes one component height to {:.3e}; positivity is degenerating",
            (cu.min(cv) * ground.height).as_f64()
        );
    }
    let params = Parameters::new(ground.params.n, two, S::one())?;
    rescale(params, &ground.profile, cu, cv)
}

/// Coefficients of the sign-flipped coupled system
///
/// ```text
/// -u'' - (n-1)/r u' = -u + mu1 u^(2q-1) + beta1 u^(q-1) v^q
/// -v'' - (n-1)/r v' = -v + mu2 v^(2q-1) + beta2 v^(q-1) u^q
/// ```
///
/// with defocusing self-interaction (`mu_i <= 0`) and attractive coupling.
/// Validated at construction; the compatibility identity
/// `mu1 beta1^(q-1) = mu2 beta2^(q-1)` is what collapses both equations onto
/// a single beta after component rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaZhaoParams<S: Scalar> {
    pub mu1: S,
    pub mu2: S,
    pub beta1: S,
    pub beta2: S,
    pub q: S,
}

impl<S: Scalar> MaZhaoParams<S> {
    pub fn new(mu1: S, mu2: S, beta1: S, beta2: S, q: S) -> Result<Self> {
        let all_finite = [mu1, mu2, beta1, beta2, q].iter().all(|x| x.is_finite());
        if !all_finite || !(beta1 > S::zero()) || !(beta2 > S::zero()) || !(q > S::one()) {
            return Err(Error::InvalidParameters(format!(
                "need beta1, beta2 > 0 and q > 1, all finite; got beta1 = {beta1}, \
                 beta2 = {beta2}, q = {q}"
            )));
        }
        if mu1 > S::zero() || mu2 > S::zero() {
            return Err(Error::InvalidParameters(format!(
                "mu coefficients must be <= 0, got mu1 = {mu1}, mu2 = {mu2}"
            )));
        }
        let qm1 = q - S::one();
        let lhs = mu1 * beta1.powf(qm1);
        let rhs = mu2 * beta2.powf(qm1);
        if (lhs - rhs).abs() > S::of(1e-12) * lhs.abs().max(rhs.abs()) {
            return Err(Error::InconsistentParameters(format!(
                "mu1 beta1^(q-1) = {} but mu2 beta2^(q-1) = {}; the transform needs them equal",
                lhs.as_f64(),
                rhs.as_f64()
            )));
        }
        let half = S::of(0.5);
        let pos1 = beta1.powf((q - S::of(2.0)) * half) * mu1 + beta2.powf(q * half);
        let pos2 = beta2.powf((q - S::of(2.0)) * half) * mu2 + beta1.powf(q * half);
        if !(pos1 > S::zero()) || !(pos2 > S::zero()) {
            return Err(Error::PositivityViolation(format!(
                "beta1^((q-2)/2) mu1 + beta2^(q/2) = {} and its mirror {} must both be positive",
                pos1.as_f64(),
                pos2.as_f64()
            )));
        }
        Ok(MaZhaoParams { mu1, mu2, beta1, beta2, q })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mu1": self.mu1.as_f64(),
            "mu2": self.mu2.as_f64(),
            "beta1": self.beta1.as_f64(),
            "beta2": self.beta2.as_f64(),
            "q": self.q.as_f64(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let field = |name: &str| -> Result<S> {
            v.get(name)
                .and_then(|x| x.as_f64())
                .map(S::of)
                .ok_or_else(|| Error::InvalidParameters(format!("missing numeric field `{name}`")))
        };
        MaZhaoParams::new(field("mu1")?, field("mu2")?, field("beta1")?, field("beta2")?, field("q")?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(s)?;
        Self::from_json(&v)
    }
}

/// The common coupling strength of the rescaled system,
///
/// ```text
/// beta = beta1 |mu1|^(-(q-2)/(2q-2)) |mu2|^(-q/(2q-2))
///      = beta2 |mu1|^(-q/(2q-2)) |mu2|^(-(q-2)/(2q-2)),
/// ```
///
/// both expressions evaluated and cross-checked. Strictly negative mu only:
/// the absolute-value powers need nonzero arguments.
pub fn mazhao_beta<S: Scalar>(p: &MaZhaoParams<S>) -> Result<S> {
    if !(p.mu1 < S::zero()) || !(p.mu2 < S::zero()) {
        return Err(Error::InvalidParameters(format!(
            "beta is defined for strictly negative mu, got mu1 = {}, mu2 = {}",
            p.mu1, p.mu2
        )));
    }
    let two = S::of(2.0);
    let denom = two * p.q - two;
    let e_small = -(p.q - two) / denom;
    let e_large = -p.q / denom;
    let first = p.beta1 * p.mu1.abs().powf(e_small) * p.mu2.abs().powf(e_large);
    let second = p.beta2 * p.mu1.abs().powf(e_large) * p.mu2.abs().powf(e_small);
    if (first - second).abs() > S::of(1e-10) * first.abs().max(second.abs()) {
        return Err(Error::InconsistentParameters(format!(
            "the two beta expressions disagree: {} vs {}",
            first.as_f64(),
            second.as_f64()
        )));
    }
    Ok((first + second) / two)
}

/// Component rescaling `(|mu1|^(1/(2q-2)) u, |mu2|^(1/(2q-2)) v)`. A solution
/// of the sign-flipped system maps to a solution of the beta-system with
/// coupling [`mazhao_beta`].
pub fn mazhao_scale<S: Scalar>(
    profile: &RadialProfile<S>,
    p: &MaZhaoParams<S>,
) -> RadialProfile<S> {
    let e = S::one() / (S::of(2.0) * p.q - S::of(2.0));
    profile.component_scaled(p.mu1.abs().powf(e), p.mu2.abs().powf(e))
}

/// Predicted height ratio `u/v` of any positive solution of the
/// sign-flipped system:
///
/// ```text
/// (mu2 + beta1^(q/2) beta2^(-(q-2)/2))^(1/(2q-2))
///   / (mu1 + beta2^(q/2) beta1^(-(q-2)/2))^(1/(2q-2))
/// ```
///
/// The positivity invariants of [`MaZhaoParams`] make both bases positive.
pub fn mazhao_ratio<S: Scalar>(p: &MaZhaoParams<S>) -> Result<S> {
    let two = S::of(2.0);
    let half = S::of(0.5);
    let e = S::one() / (two * p.q - two);
    let num_base = p.mu2 + p.beta1.powf(p.q * half) * p.beta2.powf(-(p.q - two) * half);
    let den_base = p.mu1 + p.beta2.powf(p.q * half) * p.beta1.powf(-(p.q - two) * half);
    if !(num_base > S::zero()) || !(den_base > S::zero()) {
        return Err(Error::PositivityViolation(format!(
            "ratio bases must be positive, got {} and {}",
            num_base.as_f64(),
            den_base.as_f64()
        )));
    }
    Ok(num_base.powf(e) * den_base.powf(-e))
}

/// The two right-hand sides of the sign-flipped system, for residual checks
/// via `residual_pair`: the u equation uses the first, the v equation the
/// second (each called as `f(r, own, other)`).
pub fn mazhao_system<S: Scalar>(p: &MaZhaoParams<S>) -> (Nonlinearity<S>, Nonlinearity<S>) {
    let power = S::of(2.0) * p.q - S::one();
    let side = |mu: S, beta: S, q: S| {
        let growth = GrowthBound::new(S::one() + mu.abs() + beta, power)
            .expect("validated coefficients give a legal growth bound");
        Nonlinearity::from_fn("mazhao_side", growth, move |_r, z1: S, z2: S| {
            -z1 + mu * z1.powf(S::of(2.0) * q - S::one())
                + beta * z1.powf(q - S::one()) * z2.powf(q)
        })
    };
    (side(p.mu1, p.beta1, p.q), side(p.mu2, p.beta2, p.q))
}
