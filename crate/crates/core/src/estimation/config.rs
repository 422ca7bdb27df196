use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{AugLag, NelderMead};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// Method of quantiles: absolute distance between model and empirical quantiles.
    Mq,
    /// Maximum likelihood.
    Ml,
    /// Anderson-Darling distance of the PIT values from uniformity.
    Starship,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Mq, Estimator::Ml, Estimator::Starship];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Mq => "mq",
            Estimator::Ml => "ml",
            Estimator::Starship => "starship",
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mq" => Ok(Estimator::Mq),
            "ml" => Ok(Estimator::Ml),
            "starship" => Ok(Estimator::Starship),
            other => Err(Error::domain(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Settings shared by the three FPLD estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub estimator: Estimator,
    /// Require `Q(positive_support_probability) ≥ 0`.
    pub enforce_positive_support: bool,
    pub positive_support_probability: f64,
    /// Method of quantiles only: keep finite support endpoints outside the data range.
    pub data_bracket_constraints: bool,
    pub function_tolerance: f64,
    pub parameter_tolerance: f64,
    /// Per inner Nelder-Mead solve.
    pub max_evaluations: usize,
    pub initial_step: f64,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub max_outer_iterations: usize,
    pub constraint_tolerance: f64,
    pub grid_lambda3: Vec<f64>,
    pub grid_lambda4: Vec<f64>,
    pub grid_lambda5: Vec<f64>,
    /// Holds `λ3` at this value; `Some(0.0)` gives the symmetric-weight FPLD.
    pub fixed_lambda3: Option<f64>,
    /// Method of quantiles on this many evenly spaced order statistics instead of all of them.
    pub mq_thinning: Option<usize>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            estimator: Estimator::Mq,
            enforce_positive_support: false,
            positive_support_probability: 1e-4,
            data_bracket_constraints: true,
            function_tolerance: 1e-8,
            parameter_tolerance: 1e-10,
            max_evaluations: 5000,
            initial_step: 0.1,
            initial_penalty: 10.0,
            penalty_growth: 10.0,
            max_outer_iterations: 20,
            constraint_tolerance: 1e-8,
            grid_lambda3: vec![-0.5, -0.25, 0.0, 0.25, 0.5],
            grid_lambda4: vec![0.1, 0.2, 0.4, 0.8, 1.0, 1.5],
            grid_lambda5: vec![-0.4, -0.1, 0.1, 0.2, 0.4, 0.8, 1.0, 1.5],
            fixed_lambda3: None,
            mq_thinning: None,
        }
    }
}

impl FitConfig {
    pub fn with_estimator(estimator: Estimator) -> Self {
        Self { estimator, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("function_tolerance", self.function_tolerance),
            ("parameter_tolerance", self.parameter_tolerance),
            ("initial_step", self.initial_step),
            ("initial_penalty", self.initial_penalty),
            ("constraint_tolerance", self.constraint_tolerance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.penalty_growth > 1.0) {
            return Err(Error::domain(format!("penalty_growth must exceed 1, got {}", self.penalty_growth)));
        }
        if self.max_evaluations == 0 || self.max_outer_iterations == 0 {
            return Err(Error::domain("evaluation and iteration limits must be positive"));
        }
        let p = self.positive_support_probability;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("positive_support_probability must lie in (0, 1), got {p}")));
        }
        for (name, grid) in [("grid_lambda3", &self.grid_lambda3), ("grid_lambda4", &self.grid_lambda4), ("grid_lambda5", &self.grid_lambda5)] {
            if grid.is_empty() {
                return Err(Error::domain(format!("{name} is empty")));
            }
            if grid.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(format!("{name} contains a non-finite value")));
            }
        }
        if self.grid_lambda3.iter().any(|v| v.abs() >= 1.0) {
            return Err(Error::domain("grid_lambda3 values must lie in (-1, 1)"));
        }
        if self.grid_lambda4.iter().any(|&v| v <= 0.0) {
            return Err(Error::domain("grid_lambda4 values must be positive"));
        }
        if self.grid_lambda5.iter().any(|&v| v <= -0.5) {
            return Err(Error::domain("grid_lambda5 values must exceed -0.5"));
        }
        if let Some(l3) = self.fixed_lambda3 {
            if !(l3.abs() < 1.0) {
                return Err(Error::domain(format!("fixed_lambda3 must lie in (-1, 1), got {l3}")));
            }
        }
        if self.mq_thinning.is_some_and(|m| m < 2) {
            return Err(Error::domain("mq_thinning must keep at least 2 quantiles"));
        }
        Ok(())
    }

    pub(crate) fn optimizer(&self) -> AugLag<f64> {
        AugLag {
            inner: NelderMead {
                step: self.initial_step,
                ftol: self.function_tolerance,
                xtol: self.parameter_tolerance,
                max_evals: self.max_evaluations,
            },
            initial_penalty: self.initial_penalty,
            penalty_growth: self.penalty_growth,
            max_outer: self.max_outer_iterations,
            constraint_tol: self.constraint_tolerance,
        }
    }

    pub(crate) fn lambda3_grid(&self) -> Vec<f64> {
        match self.fixed_lambda3 {
            Some(v) => vec![v],
            None => self.grid_lambda3.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_has_240_grid_points() {
        let c = FitConfig::default();
        c.validate().unwrap();
        assert_eq!(c.grid_lambda3.len() * c.grid_lambda4.len() * c.grid_lambda5.len(), 240);
    }

    #[test]
    fn partial_json_uses_defaults() {
        let c: FitConfig = serde_json::from_str(r#"{"estimator":"ml","enforce_positive_support":true}"#).unwrap();
        assert_eq!(c.estimator, Estimator::Ml);
        assert!(c.enforce_positive_support);
        assert_eq!(c.max_evaluations, 5000);
    }

    #[test]
    fn invalid_settings() {
        let c = FitConfig { function_tolerance: 0.0, ..FitConfig::default() };
        assert!(c.validate().is_err());
        let c = FitConfig { grid_lambda4: vec![], ..FitConfig::default() };
        assert!(c.validate().is_err());
    }
}
