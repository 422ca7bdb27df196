use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_quantile_regression, Design, QuantileFit, Standardization};
use crate::error::{Error, Result};
use crate::estimation::{fit_mq, Estimator, FitConfig, FitResult, QuantileSet};

/// Quantile regressions at `p = 0.01, 0.02, …, 0.99` with the shared standardisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BundleRecord", into = "BundleRecord")]
pub struct QuantileFitBundle {
    fits: Vec<QuantileFit>,
    standardization: Standardization,
}

#[derive(Serialize, Deserialize)]
struct BundleRecord {
    probabilities: Vec<f64>,
    coefficients: Vec<Vec<f64>>,
    covariate_names: Vec<String>,
    standardization: Standardization,
}

impl From<QuantileFitBundle> for BundleRecord {
    fn from(b: QuantileFitBundle) -> Self {
        Self {
            probabilities: b.fits.iter().map(|f| f.p).collect(),
            coefficients: b.fits.iter().map(|f| f.beta.clone()).collect(),
            covariate_names: b.standardization.names.clone(),
            standardization: b.standardization,
        }
    }
}

impl TryFrom<BundleRecord> for QuantileFitBundle {
    type Error = Error;

    fn try_from(r: BundleRecord) -> Result<Self> {
        if r.probabilities.len() != r.coefficients.len() {
            return Err(Error::domain("probabilities and coefficient rows differ in length"));
        }
        if r.covariate_names != r.standardization.names {
            return Err(Error::domain("covariate names disagree with the standardisation record"));
        }
        let fits = r.probabilities.into_iter().zip(r.coefficients).map(|(p, beta)| QuantileFit { p, beta }).collect();
        QuantileFitBundle::new(fits, r.standardization)
    }
}

/// The 99 regression probabilities `i/100`.
pub fn bundle_probabilities() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

impl QuantileFitBundle {
    /// Assembles a bundle; probabilities must be strictly increasing in `(0, 1)`.
    pub fn new(fits: Vec<QuantileFit>, standardization: Standardization) -> Result<Self> {
        if fits.is_empty() {
            return Err(Error::domain("bundle has no fits"));
        }
        let m = standardization.len() + 1;
        for (i, f) in fits.iter().enumerate() {
            if !(f.p > 0.0 && f.p < 1.0) || (i > 0 && f.p <= fits[i - 1].p) {
                return Err(Error::domain("bundle probabilities must increase strictly within (0, 1)"));
            }
            if f.beta.len() != m || f.beta.iter().any(|b| !b.is_finite()) {
                return Err(Error::domain(format!("fit at p = {} needs {m} finite coefficients", f.p)));
            }
        }
        Ok(Self { fits, standardization })
    }

    pub fn fits(&self) -> &[QuantileFit] {
        &self.fits
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.standardization.names
    }

    pub fn fit_at(&self, p: f64) -> Option<&QuantileFit> {
        self.fits.iter().find(|f| (f.p - p).abs() < 1e-12)
    }

    /// Raw linear predictions `x̃0ᵀβ_p` in bundle order; may cross.
    pub fn raw_predictions(&self, x0: &[f64]) -> Result<Vec<f64>> {
        let mut z = vec![1.0];
        z.extend(self.standardization.apply(x0)?);
        Ok(self.fits.iter().map(|f| f.beta.iter().zip(&z).map(|(b, x)| b * x).sum()).collect())
    }
}

/// Fits all 99 probabilities independently.
pub fn fit_bundle(design: &Design) -> Result<QuantileFitBundle> {
    let fits = bundle_probabilities()
        .into_par_iter()
        .map(|p| fit_quantile_regression(design, p))
        .collect::<Result<Vec<_>>>()?;
    QuantileFitBundle::new(fits, design.standardization().clone())
}

/// Predicted conditional quantiles at raw covariates `x0`, rearranged into nondecreasing order.
pub fn predict_quantiles(bundle: &QuantileFitBundle, x0: &[f64]) -> Result<QuantileSet> {
    let mut q = bundle.raw_predictions(x0)?;
    q.sort_by(f64::total_cmp);
    QuantileSet::new(bundle.fits.iter().map(|f| f.p).zip(q).collect())
}

/// Method-of-quantiles FPLD fit to the predicted quantiles at `x0`.
///
/// Data-bracket constraints are switched off since no raw sample exists at `x0`.
pub fn distributional_fit(bundle: &QuantileFitBundle, x0: &[f64], cfg: &FitConfig) -> Result<FitResult> {
    let qs = predict_quantiles(bundle, x0)?;
    let cfg = FitConfig { estimator: Estimator::Mq, data_bracket_constraints: false, ..cfg.clone() };
    fit_mq(&qs, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_predictions_are_sorted() {
        let st = Standardization { names: vec!["x".into()], means: vec![0.0], sds: vec![1.0] };
        let fits = vec![
            QuantileFit { p: 0.4, beta: vec![0.0, 2.0] },
            QuantileFit { p: 0.6, beta: vec![0.5, 0.0] },
        ];
        let b = QuantileFitBundle::new(fits, st).unwrap();
        assert_eq!(b.raw_predictions(&[1.0]).unwrap(), vec![2.0, 0.5]);
        let qs = predict_quantiles(&b, &[1.0]).unwrap();
        assert_eq!(qs.values(), &[0.5, 2.0]);
    }

    #[test]
    fn json_roundtrip() {
        let st = Standardization { names: vec!["x".into()], means: vec![1.0], sds: vec![2.0] };
        let b = QuantileFitBundle::new(vec![QuantileFit { p: 0.5, beta: vec![1.0, 2.0] }], st).unwrap();
        let s = serde_json::to_string(&b).unwrap();
        assert!(s.contains("\"probabilities\"") && s.contains("\"covariate_names\""));
        assert_eq!(serde_json::from_str::<QuantileFitBundle>(&s).unwrap(), b);
    }
}
