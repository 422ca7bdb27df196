use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Two-sided paired permutation test for a difference in mean score.
///
/// Under the null the sign of each paired difference is exchangeable; the
/// p-value is `(1 + #{|mean(±d)| ≥ |mean(d)|}) / (1 + n_perm)`.
pub fn permutation_test_crps(scores_a: &[f64], scores_b: &[f64], n_perm: usize, seed: u64) -> Result<f64> {
    if scores_a.len() != scores_b.len() {
        return Err(Error::domain(format!(
            "paired scores differ in length: {} vs {}",
            scores_a.len(),
            scores_b.len()
        )));
    }
    if scores_a.is_empty() {
        return Err(Error::domain("permutation test on empty scores"));
    }
    if n_perm == 0 {
        return Err(Error::domain("permutation count must be positive"));
    }
    let diffs: Vec<f64> = scores_a.iter().zip(scores_b).map(|(a, b)| a - b).collect();
    let n = diffs.len() as f64;
    let observed = (diffs.iter().sum::<f64>() / n).abs();
    // relative slack so that exact ties are counted despite rounding
    let threshold = observed - 1e-12 * observed.max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..n_perm {
        let s: f64 = diffs.iter().map(|&d| if rng.gen::<bool>() { d } else { -d }).sum();
        if (s / n).abs() >= threshold {
            extreme += 1;
        }
    }
    Ok((1 + extreme) as f64 / (1 + n_perm) as f64)
}
