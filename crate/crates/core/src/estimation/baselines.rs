use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma, LogNormal, Normal};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};

/// Gamma distribution with shape `k` and rate `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub shape: f64,
    pub rate: f64,
}

/// Lognormal distribution: `log Y ~ N(meanlog, sdlog²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalFit {
    pub meanlog: f64,
    pub sdlog: f64,
}

fn positive_sample(y: &[f64]) -> Result<()> {
    if y.len() < 2 {
        return Err(Error::domain(format!("need at least 2 observations, got {}", y.len())));
    }
    if let Some(bad) = y.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::domain(format!("observation {bad} is not positive and finite")));
    }
    Ok(())
}

fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + 1.0 / x + x2 / 2.0 + (x2 / x) * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 42.0 - x2 / 30.0)))
}

/// Maximum likelihood by Newton iteration on `log k − ψ(k) = log ȳ − mean(log y)`.
pub fn fit_gamma_ml(y: &[f64]) -> Result<GammaFit> {
    positive_sample(y)?;
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let mean_log = y.iter().map(|v| v.ln()).sum::<f64>() / n;
    let s = mean.ln() - mean_log;
    if !(s > 0.0) {
        return Err(Error::domain("gamma fit needs non-constant data"));
    }
    let mut k = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    for _ in 0..100 {
        let f = k.ln() - digamma(k) - s;
        let df = 1.0 / k - trigamma(k);
        let mut next = k - f / df;
        if !(next > 0.0) {
            next = k / 2.0;
        }
        let done = (next - k).abs() <= 1e-13 * k;
        k = next;
        if done {
            return Ok(GammaFit { shape: k, rate: k / mean });
        }
    }
    Err(Error::Convergence(format!("gamma shape iteration did not settle (s = {s})")))
}

/// Closed-form maximum likelihood from the moments of `log y`.
pub fn fit_lognormal_ml(y: &[f64]) -> Result<LognormalFit> {
    positive_sample(y)?;
    let n = y.len() as f64;
    let logs: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let meanlog = logs.iter().sum::<f64>() / n;
    let sdlog = (logs.iter().map(|v| (v - meanlog).powi(2)).sum::<f64>() / n).sqrt();
    if !(sdlog > 0.0) {
        return Err(Error::domain("lognormal fit needs non-constant data"));
    }
    Ok(LognormalFit { meanlog, sdlog })
}

impl GammaFit {
    fn dist(&self, shape: f64) -> Gamma {
        Gamma::new(shape, self.rate).expect("validated gamma parameters")
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            0.0
        } else {
            self.dist(self.shape).cdf(y)
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.dist(self.shape).inverse_cdf(p)
    }

    /// `y(2F_k(y) − 1) − (k/β)(2F_{k+1}(y) − 1) − 1/(β·B(1/2, k))`.
    pub fn crps(&self, y: f64) -> f64 {
        let (k, b) = (self.shape, self.rate);
        let (f, f1) = if y <= 0.0 { (0.0, 0.0) } else { (self.dist(k).cdf(y), self.dist(k + 1.0).cdf(y)) };
        let ln_beta = ln_gamma(0.5) + ln_gamma(k) - ln_gamma(k + 0.5);
        y * (2.0 * f - 1.0) - k / b * (2.0 * f1 - 1.0) - (-ln_beta).exp() / b
    }
}

impl LognormalFit {
    fn dist(&self) -> LogNormal {
        LogNormal::new(self.meanlog, self.sdlog).expect("validated lognormal parameters")
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            0.0
        } else {
            self.dist().cdf(y)
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.dist().inverse_cdf(p)
    }

    /// `y(2Φ(z) − 1) − 2e^{μ+σ²/2}[Φ(z − σ) + Φ(σ/√2) − 1]` with `z = (log y − μ)/σ`.
    pub fn crps(&self, y: f64) -> f64 {
        let std = Normal::new(0.0, 1.0).unwrap();
        let (mu, sigma) = (self.meanlog, self.sdlog);
        let (pz, pzs) = if y <= 0.0 {
            (0.0, 0.0)
        } else {
            let z = (y.ln() - mu) / sigma;
            (std.cdf(z), std.cdf(z - sigma))
        };
        let mean = (mu + 0.5 * sigma * sigma).exp();
        y * (2.0 * pz - 1.0) - 2.0 * mean * (pzs + std.cdf(sigma / std::f64::consts::SQRT_2) - 1.0)
    }
}
