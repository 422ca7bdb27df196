//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use fpld::{FpldNatural, FpldStar};
use proptest::prelude::*;

/// Direct evaluation of the quantile function with `powf`, no shared helpers.
pub fn naive_quantile(l: [f64; 5], p: f64) -> f64 {
    let [l1, l2, l3, l4, l5] = l;
    let left = power_term(l4, p);
    let right = power_term(l5, 1.0 - p);
    l1 + 0.5 * l2 * ((1.0 - l3) * left - (1.0 + l3) * right)
}

/// `(x^λ − 1)/λ`, switching to `expm1` for small `λ` to avoid cancellation.
fn power_term(lambda: f64, x: f64) -> f64 {
    if lambda == 0.0 {
        x.ln()
    } else if lambda.abs() < 1e-3 {
        (lambda * x.ln()).exp_m1() / lambda
    } else {
        (x.powf(lambda) - 1.0) / lambda
    }
}

/// Plain bisection for `Q(p) = y` on `[0, 1]`.
pub fn bisection_cdf(l: [f64; 5], y: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if naive_quantile(l, mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&mut f, a, b, fa, fm, fb, whole, tol, 50)
}

/// CRPS as `∫ (F(t) − 1{t ≥ y})² dt`, written in probability space so the
/// integrand stays bounded: `∫₀¹ (p − 1{Q(p) ≥ y})² Q'(p) dp` split at `F(y)`.
pub fn crps_oracle(l: [f64; 5], y: f64) -> f64 {
    let [_, l2, l3, l4, l5] = l;
    let dq = |p: f64| 0.5 * l2 * ((1.0 - l3) * p.powf(l4 - 1.0) + (1.0 + l3) * (1.0 - p).powf(l5 - 1.0));
    let (lo, hi) = (naive_quantile(l, 0.0), naive_quantile(l, 1.0));
    let u = if y <= lo { 0.0 } else if y >= hi { 1.0 } else { bisection_cdf(l, y) };
    let mut total = 0.0;
    if u > 0.0 {
        total += integrate(|p| if p <= 0.0 { 0.0 } else { p * p * dq(p) }, 0.0, u, 1e-12);
    }
    if u < 1.0 {
        total += integrate(|p| if p >= 1.0 { 0.0 } else { (1.0 - p).powi(2) * dq(p) }, u, 1.0, 1e-12);
    }
    if y < lo {
        total += lo - y;
    }
    if y > hi {
        total += y - hi;
    }
    total
}

/// Star parameters inside the optimizer's feasible region.
pub fn star_strategy() -> impl Strategy<Value = FpldStar<f64>> {
    (-10.0..10.0f64, 0.05..10.0f64, -0.95..0.95f64, 0.05..1.5f64, -0.45..1.5f64)
        .prop_map(|(m, s, l3, l4, l5)| FpldStar::new(m, s, l3, l4, l5).unwrap())
}

pub fn natural_strategy() -> impl Strategy<Value = FpldNatural<f64>> {
    (-10.0..10.0f64, 0.05..10.0f64, -1.0..=1.0f64, -0.5..1.5f64, -0.5..1.5f64)
        .prop_map(|(a, b, c, d, e)| FpldNatural::new(a, b, c, d, e).unwrap())
}
