use std::time::Duration;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Estimator;
use crate::dist::FpldStar;

/// Value of one inequality constraint `c(λ) ≥ 0` at the returned parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSlack {
    pub name: String,
    /// `None` when the constraint is vacuous (an infinite support endpoint).
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub estimator: Estimator,
    pub params: FpldStar<f64>,
    /// Estimator objective: absolute quantile loss, negative log-likelihood or Anderson-Darling statistic.
    pub loss: f64,
    pub converged: bool,
    pub evaluations: usize,
    #[serde(rename = "elapsed_ms", serialize_with = "ser_millis", deserialize_with = "de_millis")]
    pub elapsed: Duration,
    pub constraint_slack: Vec<ConstraintSlack>,
}

impl FitResult {
    /// Smallest finite constraint value, or `None` when nothing binds.
    pub fn min_slack(&self) -> Option<f64> {
        self.constraint_slack.iter().filter_map(|c| c.value).reduce(f64::min)
    }
}

fn ser_millis<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

fn de_millis<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
    let ms = f64::deserialize(d)?;
    Duration::try_from_secs_f64(ms / 1e3).map_err(serde::de::Error::custom)
}
