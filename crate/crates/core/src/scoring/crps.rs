use serde::{Deserialize, Serialize};

use crate::dist::{box_cox, FpldNatural};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Continuous ranked probability score; non-negative, in units of the data.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CrpsValue<T = f64>(pub T);

impl<T: Scalar> CrpsValue<T> {
    pub fn value(self) -> T {
        self.0
    }
}

/// `∫_F^1 (p^λ − 1)/λ dp = (−1 − F·((F^λ − 1)/λ − 1)) / (λ + 1)`.
fn upper_integral_left<T: Scalar>(lambda: T, level: T) -> T {
    let tail = if level > T::zero() { level * (box_cox(lambda, level.ln()) - T::one()) } else { T::zero() };
    (-T::one() - tail) / (lambda + T::one())
}

/// `∫_F^1 ((1 − p)^λ − 1)/λ dp = (1 − F)·(((1 − F)^λ − 1)/λ − 1) / (λ + 1)`.
fn upper_integral_right<T: Scalar>(lambda: T, level: T) -> T {
    let s = T::one() - level;
    if s > T::zero() {
        s * (box_cox(lambda, s.ln()) - T::one()) / (lambda + T::one())
    } else {
        T::zero()
    }
}

/// CRPS of an FPLD forecast when `F(y)` is already known.
///
/// `S(F, y) = y(2F(y) − 1) − 2∫₀¹ pQ(p) dp + 2∫_{F(y)}¹ Q(p) dp`, with both
/// integrals in closed form. The limit shape `λ = 0` falls out of the same
/// expressions through the logarithmic branch of `(p^λ − 1)/λ`.
pub fn crps_fpld_given_level<T: Scalar>(params: &FpldNatural<T>, y: T, level: T) -> Result<CrpsValue<T>> {
    let (l1, l2, l3, l4, l5) =
        (params.lambda1(), params.lambda2(), params.lambda3(), params.lambda4(), params.lambda5());
    if !(l4 > -T::one() && l5 > -T::one()) {
        return Err(Error::domain(format!(
            "CRPS is infinite for tail shapes ({l4}, {l5}); both must exceed -1"
        )));
    }
    if !y.is_finite() {
        return Err(Error::domain(format!("observation must be finite, got {y}")));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let (w4, w5) = (one - l3, one + l3);

    let mut upper = (one - level) * l1;
    let mut bracket = T::zero();
    if w4 != T::zero() {
        bracket = bracket + w4 * upper_integral_left(l4, level);
    }
    if w5 != T::zero() {
        bracket = bracket - w5 * upper_integral_right(l5, level);
    }
    upper = upper + half * l2 * bracket;

    let first_moment = half * l1
        + half
            * l2
            * (-w4 / (two * (l4 + two)) + w5 * (l5 + T::lit(3.0)) / (two * (l5 + one) * (l5 + two)));

    let score = y * (two * level - one) - two * first_moment + two * upper;
    Ok(CrpsValue(score.max(T::zero())))
}

/// Closed-form CRPS of an FPLD forecast for observation `y`.
pub fn crps_fpld<T: Scalar>(params: &FpldNatural<T>, y: T) -> Result<CrpsValue<T>> {
    let level = params.cdf(y)?;
    crps_fpld_given_level(params, y, level)
}

/// Pairwise summation; the reduction order depends only on the length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Mean CRPS over paired forecasts and observations.
pub fn mean_crps(params: &[FpldNatural<f64>], y: &[f64]) -> Result<f64> {
    if params.len() != y.len() {
        return Err(Error::domain(format!("{} forecasts but {} observations", params.len(), y.len())));
    }
    if y.is_empty() {
        return Err(Error::domain("mean CRPS of an empty set"));
    }
    let scores = params
        .iter()
        .zip(y)
        .map(|(p, &v)| crps_fpld(p, v).map(CrpsValue::value))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&scores) / y.len() as f64)
}

/// Mean CRPS of one forecast against many observations. Observations are
/// visited in sorted order so each CDF solve is warm-started from the previous one.
pub fn mean_crps_single(params: &FpldNatural<f64>, y: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::domain("mean CRPS of an empty set"));
    }
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(format!("observation must be finite, got {bad}")));
    }
    let mut idx: Vec<usize> = (0..y.len()).collect();
    idx.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
    let mut scores = vec![0.0; y.len()];
    let mut level = 0.5;
    for &i in &idx {
        level = params.cdf_from(y[i], level);
        scores[i] = crps_fpld_given_level(params, y[i], level)?.value();
        if !(level > 0.0 && level < 1.0) {
            level = 0.5;
        }
    }
    Ok(pairwise_sum(&scores) / y.len() as f64)
}
