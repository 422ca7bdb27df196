use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-covariate centring and scaling learned from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub names: Vec<String>,
    pub means: Vec<f64>,
    /// Sample standard deviations (divisor `n − 1`).
    pub sds: Vec<f64>,
}

impl Standardization {
    /// Learns means and standard deviations from `rows` (one inner vector per observation).
    pub fn fit(rows: &[Vec<f64>], names: &[String]) -> Result<Self> {
        let k = names.len();
        if rows.len() < 2 {
            return Err(Error::domain(format!("standardisation needs at least 2 rows, got {}", rows.len())));
        }
        check_rows(rows, k)?;
        let n = rows.len() as f64;
        let mut means = vec![0.0; k];
        let mut sds = vec![0.0; k];
        for j in 0..k {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let sd = var.sqrt();
            if !(sd > 1e-12 * mean.abs().max(1.0)) {
                return Err(Error::domain(format!("covariate '{}' has zero variance", names[j])));
            }
            means[j] = mean;
            sds[j] = sd;
        }
        Ok(Self { names: names.to_vec(), means, sds })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn apply(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.len() {
            return Err(Error::domain(format!("expected {} covariates, got {}", self.len(), raw.len())));
        }
        if let Some(j) = raw.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("covariate '{}' is not finite", self.names[j])));
        }
        Ok(raw.iter().zip(&self.means).zip(&self.sds).map(|((x, m), s)| (x - m) / s).collect())
    }
}

fn check_rows(rows: &[Vec<f64>], k: usize) -> Result<()> {
    for (i, r) in rows.iter().enumerate() {
        if r.len() != k {
            return Err(Error::domain(format!("row {i} has {} covariates, expected {k}", r.len())));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!("row {i} contains a non-finite covariate")));
        }
    }
    Ok(())
}

/// Standardises the columns of `rows`, returning the transformed rows and the record.
pub fn standardize(rows: &[Vec<f64>], names: &[String]) -> Result<(Vec<Vec<f64>>, Standardization)> {
    let st = Standardization::fit(rows, names)?;
    let out = rows.iter().map(|r| st.apply(r)).collect::<Result<_>>()?;
    Ok((out, st))
}

/// Regression design: intercept plus standardised covariates, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    x: Vec<f64>,
    y: Vec<f64>,
    cols: usize,
    standardization: Standardization,
}

impl Design {
    /// `rows[i]` holds the raw covariates of observation `i`; an empty `names` gives an intercept-only model.
    pub fn new(rows: &[Vec<f64>], names: &[String], y: Vec<f64>) -> Result<Self> {
        if rows.len() != y.len() {
            return Err(Error::domain(format!("{} covariate rows for {} responses", rows.len(), y.len())));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("response {i} is not finite")));
        }
        let standardization = if names.is_empty() {
            check_rows(rows, 0)?;
            Standardization { names: vec![], means: vec![], sds: vec![] }
        } else {
            Standardization::fit(rows, names)?
        };
        let cols = names.len() + 1;
        let mut x = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            x.push(1.0);
            x.extend(standardization.apply(r)?);
        }
        Ok(Self { x, y, cols, standardization })
    }

    /// Intercept-only design.
    pub fn intercept_only(y: Vec<f64>) -> Result<Self> {
        let rows = vec![Vec::new(); y.len()];
        Self::new(&rows, &[], y)
    }

    pub fn rows(&self) -> usize {
        self.y.len()
    }

    /// Number of coefficients, intercept included.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.cols..(i + 1) * self.cols]
    }

    pub fn response(&self) -> &[f64] {
        &self.y
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    pub fn predict(&self, i: usize, beta: &[f64]) -> f64 {
        self.row(i).iter().zip(beta).map(|(a, b)| a * b).sum()
    }
}
