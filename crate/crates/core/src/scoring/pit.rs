use serde::{Deserialize, Serialize};

use crate::dist::FpldNatural;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Deviation of the first two PIT moments from those of a standard uniform.
///
/// `e_mu < 0` points to a positive forecast bias; `e_sigma < 0` to overdispersion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitErrors<T = f64> {
    pub e_mu: T,
    pub e_sigma: T,
}

/// `e_mu = mean(u) − 1/2`, `e_sigma = sd(u) − 1/√12` (sample sd, divisor `n − 1`).
pub fn pit_errors<T: Scalar>(u: &[T]) -> Result<PitErrors<T>> {
    if u.len() < 2 {
        return Err(Error::domain(format!("PIT errors need at least 2 values, got {}", u.len())));
    }
    if let Some(bad) = u.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
        return Err(Error::domain(format!("PIT value {bad} outside [0, 1]")));
    }
    let n = T::from_usize(u.len()).unwrap();
    let mean = u.iter().fold(T::zero(), |a, &v| a + v) / n;
    let ss = u.iter().fold(T::zero(), |a, &v| a + (v - mean) * (v - mean));
    let sd = (ss / (n - T::one())).sqrt();
    Ok(PitErrors { e_mu: mean - T::lit(0.5), e_sigma: sd - T::one() / T::lit(12.0).sqrt() })
}

/// `F(y_i)` for every observation, in input order.
pub fn pit_values(params: &FpldNatural<f64>, y: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(format!("observation must be finite, got {bad}")));
    }
    let mut idx: Vec<usize> = (0..y.len()).collect();
    idx.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
    let mut out = vec![0.0; y.len()];
    let mut level = 0.5;
    for &i in &idx {
        out[i] = params.cdf_from(y[i], level);
        if out[i] > 0.0 && out[i] < 1.0 {
            level = out[i];
        }
    }
    Ok(out)
}

/// `(y_(i), Q((i − 0.5)/n))` pairs for a QQ plot.
pub fn qq_points(params: &FpldNatural<f64>, y: &[f64]) -> Result<Vec<(f64, f64)>> {
    if y.len() < 2 {
        return Err(Error::domain("QQ points need at least 2 observations"));
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, params.quantile_unchecked((i as f64 + 0.5) / n)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_pair_has_no_bias() {
        let e = pit_errors(&[0.25, 0.75]).unwrap();
        assert_eq!(e.e_mu, 0.0);
    }

    #[test]
    fn uniform_grid() {
        let n = 1000;
        let u: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let e = pit_errors(&u).unwrap();
        assert!(e.e_mu.abs() < 1e-12);
        assert!(e.e_sigma.abs() < 1e-3);
    }

    #[test]
    fn rejects_short_or_invalid() {
        assert!(pit_errors(&[0.5]).is_err());
        assert!(pit_errors(&[0.5, 1.5]).is_err());
    }

    #[test]
    fn qq_on_exact_quantiles_is_identity() {
        let f = FpldNatural::new(4.0, 2.0, 0.1, 0.3, 0.2).unwrap();
        let n = 50;
        let y: Vec<f64> = (0..n).map(|i| f.quantile((i as f64 + 0.5) / n as f64).unwrap()).collect();
        let pts = qq_points(&f, &y).unwrap();
        assert_eq!(pts.len(), n);
        for (a, b) in pts {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
