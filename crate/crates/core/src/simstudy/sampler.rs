use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::dist::FpldStar;
use crate::error::{Error, Result};

const MAX_REJECTIONS: usize = 100_000;

/// Random truth for the simulation study.
///
/// Draws `λ1* ~ N(5, 3²)`, `λ2* ~ U(1.5, 8)`, `λ3 ~ U(−0.9, 0.9)`,
/// `λ4 ~ U(0.01, 0.9)`, `λ5 ~ U(−0.3, 0.7)` and keeps the draw when
/// `Q(0) > 0` and `Q(1) − Q(0) > 1`.
pub fn sample_lambda_star<R: Rng + ?Sized>(rng: &mut R) -> Result<FpldStar<f64>> {
    sample_lambda_star_with(rng, false)
}

/// As [`sample_lambda_star`]; with `strict_finite_support` draws with an
/// unbounded right tail (`λ5 ≤ 0`) are rejected too.
pub fn sample_lambda_star_with<R: Rng + ?Sized>(rng: &mut R, strict_finite_support: bool) -> Result<FpldStar<f64>> {
    let median = Normal::<f64>::new(5.0, 3.0).unwrap();
    let iqr = Uniform::<f64>::new(1.5, 8.0);
    let l3 = Uniform::new(-0.9, 0.9);
    let l4 = Uniform::new(0.01, 0.9);
    let l5 = Uniform::new(-0.3, 0.7);
    for _ in 0..MAX_REJECTIONS {
        let star = FpldStar::new(median.sample(rng), iqr.sample(rng), l3.sample(rng), l4.sample(rng), l5.sample(rng))?;
        let support = star.to_natural().support();
        if support.lower > 0.0 && support.upper - support.lower > 1.0 && (!strict_finite_support || support.upper.is_finite()) {
            return Ok(star);
        }
    }
    Err(Error::Convergence(format!("no parameter draw accepted after {MAX_REJECTIONS} attempts")))
}

/// `(1/R) Σ_r (1/5) Σ_j (λ_rj − λ̂_rj)²` in the median/IQR coordinates.
pub fn parameter_mse(truths: &[FpldStar<f64>], estimates: &[FpldStar<f64>]) -> Result<f64> {
    if truths.len() != estimates.len() {
        return Err(Error::domain(format!("{} truths but {} estimates", truths.len(), estimates.len())));
    }
    if truths.is_empty() {
        return Err(Error::domain("parameter MSE of zero replicates"));
    }
    let total: f64 = truths.iter().zip(estimates).map(|(t, e)| squared_error(t, e)).sum();
    Ok(total / truths.len() as f64)
}

pub(crate) fn squared_error(truth: &FpldStar<f64>, estimate: &FpldStar<f64>) -> f64 {
    truth.to_array().iter().zip(estimate.to_array()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 5.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn draws_satisfy_acceptance_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let s = sample_lambda_star(&mut rng).unwrap();
            let sup = s.to_natural().support();
            assert!(sup.lower > 0.0 && sup.upper - sup.lower > 1.0);
            assert!((0.01..=0.9).contains(&s.lambda4()) && (-0.3..=0.7).contains(&s.lambda5()));
        }
    }

    #[test]
    fn strict_mode_has_finite_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            assert!(sample_lambda_star_with(&mut rng, true).unwrap().to_natural().support().upper.is_finite());
        }
    }

    #[test]
    fn mse_arithmetic() {
        let a = FpldStar::new(1.0, 2.0, 0.0, 0.5, 0.5).unwrap();
        let b = FpldStar::new(2.0, 2.0, 0.0, 0.5, 0.5).unwrap();
        assert_eq!(parameter_mse(&[a], &[a]).unwrap(), 0.0);
        assert!((parameter_mse(&[a], &[b]).unwrap() - 0.2).abs() < 1e-15);
        assert!(parameter_mse(&[a], &[]).is_err());
    }
}
