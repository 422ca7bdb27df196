use serde::{Deserialize, Serialize};

use super::mean_crps_single;
use crate::dist::FpldNatural;
use crate::error::{Error, Result};

/// How the CRPS ratio in the skill score is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkillMode {
    /// Mean CRPS of truth and fit over the supplied observations.
    #[default]
    Empirical,
    /// Expected CRPS under the truth, estimated from `mc_samples` fresh draws.
    Expected,
}

impl std::str::FromStr for SkillMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "empirical" => Ok(SkillMode::Empirical),
            "expected" => Ok(SkillMode::Expected),
            _ => Err(Error::domain(format!("unknown skill mode '{s}' (expected empirical or expected)"))),
        }
    }
}

/// `1 − CRPS(truth) / CRPS(fitted)`; zero for a perfect fit, positive when
/// the fitted forecast scores worse than the truth.
pub fn skill_score(
    fitted: &FpldNatural<f64>,
    truth: &FpldNatural<f64>,
    y: &[f64],
    mode: SkillMode,
    mc_samples: usize,
    seed: u64,
) -> Result<f64> {
    let draws;
    let obs: &[f64] = match mode {
        SkillMode::Empirical => y,
        SkillMode::Expected => {
            if mc_samples == 0 {
                return Err(Error::domain("expected-CRPS skill needs mc_samples > 0"));
            }
            draws = truth.sample(mc_samples, seed);
            &draws
        }
    };
    let reference = mean_crps_single(truth, obs)?;
    let forecast = mean_crps_single(fitted, obs)?;
    if forecast == 0.0 {
        return Err(Error::domain("skill score undefined: fitted mean CRPS is zero"));
    }
    Ok(1.0 - reference / forecast)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit_scores_zero() {
        let t = FpldNatural::new(5.0, 2.0, 0.1, 0.4, 0.2).unwrap();
        let y = t.sample(500, 3);
        assert_eq!(skill_score(&t, &t, &y, SkillMode::Empirical, 0, 0).unwrap(), 0.0);
        assert_eq!(skill_score(&t, &t, &y, SkillMode::Expected, 200, 4).unwrap(), 0.0);
    }

    #[test]
    fn shifted_fit_is_worse() {
        let t = FpldNatural::new(5.0, 2.0, 0.1, 0.4, 0.2).unwrap();
        let y = t.sample(2000, 3);
        let s = skill_score(&t.shifted(3.0), &t, &y, SkillMode::Empirical, 0, 0).unwrap();
        assert!(s > 0.0 && s < 1.0);
    }
}
