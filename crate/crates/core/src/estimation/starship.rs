use std::time::Instant;

use super::driver::{optimise, Constraints};
use super::likelihood::{best_start, data_init_candidates, sorted_sample, PitCache};
use super::{Estimator, FitConfig, FitResult};
use crate::error::Result;

const AD_CLAMP: f64 = 1e-12;

/// Anderson-Darling statistic of `u` against the standard uniform; values are
/// clamped to `[1e−12, 1 − 1e−12]`.
pub fn anderson_darling(u: &[f64]) -> f64 {
    let mut sorted = u.to_vec();
    sorted.sort_by(f64::total_cmp);
    anderson_darling_sorted(&sorted)
}

pub(crate) fn anderson_darling_sorted(u: &[f64]) -> f64 {
    let n = u.len();
    if n == 0 {
        return f64::NAN;
    }
    let nf = n as f64;
    let mut s = 0.0;
    for (i, &v) in u.iter().enumerate() {
        let v = v.clamp(AD_CLAMP, 1.0 - AD_CLAMP);
        // the (2i − 1) log u_(i) term and the (2(n − i) + 1) log(1 − u_(i)) term
        let k = (2 * i + 1) as f64;
        s += k * v.ln() + (2.0 * nf - k) * (-v).ln_1p();
    }
    -nf - s / nf
}

/// Starship fit: minimises the Anderson-Darling statistic of the fitted PIT values.
pub fn fit_starship(y: &[f64], cfg: &FitConfig) -> Result<FitResult> {
    let started = Instant::now();
    cfg.validate()?;
    let sorted = sorted_sample(y)?;
    let candidates = data_init_candidates(&sorted, cfg)?;
    let mut cache = PitCache::new(sorted);
    let init = best_start(candidates, |nat| anderson_darling_sorted(cache.pit(nat)));
    let cfg = FitConfig { estimator: Estimator::Starship, ..cfg.clone() };
    optimise(&cfg, &init, Constraints::for_config(&cfg), |nat| anderson_darling_sorted(cache.pit(nat)), started)
}
