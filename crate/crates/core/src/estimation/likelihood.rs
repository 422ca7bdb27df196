use std::time::Instant;

use super::driver::{optimise, Constraints};
use super::mq::{anchor, grid_search_where};
use super::{empirical_quantiles, fit_mq, Estimator, FitConfig, FitResult};
use crate::dist::{FpldNatural, FpldStar};
use crate::error::{Error, Result};

pub(crate) const MIN_OBSERVATIONS: usize = 10;

/// `Σ log f(y_i)` with `f = 1/Q'(F(y))`; `−∞` when any observation lies outside the open support.
pub fn log_likelihood(params: &FpldNatural<f64>, y: &[f64]) -> f64 {
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    PitCache::new(sorted).log_likelihood(params)
}

/// Sorted observations with the PIT values of the previous evaluation kept as warm starts.
pub(crate) struct PitCache {
    y: Vec<f64>,
    p: Vec<f64>,
}

impl PitCache {
    pub(crate) fn new(sorted_y: Vec<f64>) -> Self {
        let n = sorted_y.len();
        let p = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        Self { y: sorted_y, p }
    }

    pub(crate) fn log_likelihood(&mut self, nat: &FpldNatural<f64>) -> f64 {
        let support = nat.support();
        let (lo, hi) = (self.y[0], self.y[self.y.len() - 1]);
        if !(lo > support.lower && hi < support.upper) {
            return f64::NEG_INFINITY;
        }
        let mut total = 0.0;
        let mut prev = 0.0;
        for (y, p) in self.y.iter().zip(self.p.iter_mut()) {
            let (u, slope) = nat.cdf_with_slope(*y, p.max(prev));
            *p = u;
            prev = u;
            total -= slope.ln();
        }
        if total.is_nan() {
            f64::NEG_INFINITY
        } else {
            total
        }
    }

    /// Updates the cached PIT values and returns them (nondecreasing, as `y` is sorted).
    pub(crate) fn pit(&mut self, nat: &FpldNatural<f64>) -> &[f64] {
        let mut prev = 0.0;
        for (y, p) in self.y.iter().zip(self.p.iter_mut()) {
            let (u, _) = nat.cdf_with_slope(*y, p.max(prev));
            *p = u;
            prev = u;
        }
        &self.p
    }
}

pub(crate) fn sorted_sample(y: &[f64]) -> Result<Vec<f64>> {
    if y.len() < MIN_OBSERVATIONS {
        return Err(Error::domain(format!(
            "need at least {MIN_OBSERVATIONS} observations, got {}",
            y.len()
        )));
    }
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(format!("observation {bad} is not finite")));
    }
    let mut s = y.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Starting candidates for the data-based estimators: the best grid point whose
/// support strictly contains the data, and a bracketed quantile fit widened until it does.
pub(crate) fn data_init_candidates(sorted: &[f64], cfg: &FitConfig) -> Result<Vec<FpldStar<f64>>> {
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let brackets = |nat: &FpldNatural<f64>| {
        let s = nat.support();
        s.lower < lo && s.upper > hi
    };
    let qs = empirical_quantiles(sorted)?;
    let mut out = Vec::with_capacity(2);
    if let Some(g) = grid_search_where(&qs, cfg, brackets) {
        out.push(g.init);
    }
    let mq_cfg = FitConfig { estimator: Estimator::Mq, data_bracket_constraints: true, ..cfg.clone() };
    match fit_mq(&qs, &mq_cfg) {
        Ok(fit) => {
            let mut star = fit.params;
            if !(star.iqr() > 0.0) {
                let (median, iqr) = anchor(&qs);
                star = FpldStar::new_unchecked(median, iqr, star.lambda3(), star.lambda4(), star.lambda5());
            }
            for _ in 0..200 {
                if brackets(&star.to_natural()) {
                    out.push(star);
                    break;
                }
                star = FpldStar::new_unchecked(star.median(), star.iqr() * 1.25, star.lambda3(), star.lambda4(), star.lambda5());
            }
        }
        Err(e) if out.is_empty() => return Err(e),
        Err(_) => {}
    }
    if out.is_empty() {
        return Err(Error::Convergence("could not find a starting point whose support contains the data".into()));
    }
    Ok(out)
}

/// The candidate from [`data_init_candidates`] with the smallest objective.
pub(crate) fn best_start(
    candidates: Vec<FpldStar<f64>>,
    mut objective: impl FnMut(&FpldNatural<f64>) -> f64,
) -> FpldStar<f64> {
    let mut best = (candidates[0], f64::INFINITY);
    for c in candidates {
        let v = objective(&c.to_natural());
        if v < best.1 {
            best = (c, v);
        }
    }
    best.0
}

/// Maximum-likelihood fit; needs at least 10 observations.
pub fn fit_ml(y: &[f64], cfg: &FitConfig) -> Result<FitResult> {
    let started = Instant::now();
    cfg.validate()?;
    let sorted = sorted_sample(y)?;
    let candidates = data_init_candidates(&sorted, cfg)?;
    let mut cache = PitCache::new(sorted);
    let init = best_start(candidates, |nat| -cache.log_likelihood(nat));
    let cfg = FitConfig { estimator: Estimator::Ml, ..cfg.clone() };
    optimise(&cfg, &init, Constraints::for_config(&cfg), |nat| -cache.log_likelihood(nat), started)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_likelihood() {
        let f = FpldNatural::new(0.0, 2.0, 0.0, 1.0, 1.0).unwrap();
        let ll = log_likelihood(&f, &[-0.5, 0.0, 0.3, 0.9]);
        assert!((ll - 4.0 * 0.5f64.ln()).abs() < 1e-12);
        assert_eq!(log_likelihood(&f, &[0.0, 1.5]), f64::NEG_INFINITY);
    }

    #[test]
    fn matches_sum_of_log_densities() {
        let f = FpldNatural::<f64>::new(3.0, 1.5, 0.3, 0.2, -0.1).unwrap();
        let y = f.sample(200, 9);
        let direct: f64 = y.iter().map(|&v| f.density(v).unwrap().ln()).sum();
        let ll = log_likelihood(&f, &y);
        assert!((ll - direct).abs() < 1e-9, "{ll} vs {direct}");
    }

    #[test]
    fn too_few_observations() {
        assert!(fit_ml(&[1.0, 2.0, 3.0], &FitConfig::default()).is_err());
    }
}
