//! Adaptive Simpson quadrature used by the identity checks.

use crate::scalar::Scalar;

/// Integrates `f` over `[a, b]` to the requested absolute tolerance with
/// adaptive Simpson refinement. Recursion stops once the Richardson
/// estimate of the local error is below the budget for the subinterval or
/// the depth cap is reached, so the routine always terminates.
pub fn adaptive_simpson<S: Scalar, F: Fn(S) -> S>(f: &F, a: S, b: S, abs_tol: S) -> S {
    if a == b {
        return S::zero();
    }
    let half = S::of(0.5);
    let m = (a + b) * half;
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, abs_tol, 48)
}

fn simpson<S: Scalar>(a: S, b: S, fa: S, fm: S, fb: S) -> S {
    (b - a) / S::of(6.0) * (fa + S::of(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<S: Scalar, F: Fn(S) -> S>(
    f: &F,
    a: S,
    b: S,
    fa: S,
    fm: S,
    fb: S,
    whole: S,
    tol: S,
    depth: u32,
) -> S {
    let half = S::of(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= S::of(15.0) * tol {
        // Richardson correction raises the result to sixth order locally.
        return left + right + delta / S::of(15.0);
    }
    let half_tol = tol * half;
    recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1)
}
