use std::time::Instant;

use super::{ConstraintSlack, FitConfig, FitResult};
use crate::dist::{FpldNatural, FpldStar, FpldUnconstrained};
use crate::error::Result;

/// Maps optimizer vectors to parameters, dropping the `λ3` coordinate when it is held fixed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Coordinates {
    fixed_lambda3: Option<f64>,
}

impl Coordinates {
    pub(crate) fn new(cfg: &FitConfig) -> Self {
        Self { fixed_lambda3: cfg.fixed_lambda3 }
    }

    pub(crate) fn encode(&self, star: &FpldStar<f64>) -> Result<Vec<f64>> {
        let v = star.to_unconstrained()?.values;
        Ok(match self.fixed_lambda3 {
            Some(_) => vec![v[0], v[1], v[3], v[4]],
            None => v.to_vec(),
        })
    }

    pub(crate) fn decode(&self, x: &[f64]) -> FpldStar<f64> {
        match self.fixed_lambda3 {
            Some(l3) => {
                let s = FpldUnconstrained::new([x[0], x[1], 0.0, x[2], x[3]]).to_star();
                FpldStar::new_unchecked(s.median(), s.iqr(), l3, s.lambda4(), s.lambda5())
            }
            None => FpldUnconstrained::new([x[0], x[1], x[2], x[3], x[4]]).to_star(),
        }
    }
}

/// Inequality constraints `c(λ) ≥ 0` active in a fit.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Constraints {
    /// `y_min − Q(0)`.
    pub lower_bracket: Option<f64>,
    /// `Q(1) − y_max`; infinite when the right tail is unbounded.
    pub upper_bracket: Option<f64>,
    /// `Q(p) ≥ 0` at this probability.
    pub positivity: Option<f64>,
}

impl Constraints {
    pub(crate) fn for_config(cfg: &FitConfig) -> Self {
        Self {
            positivity: cfg.enforce_positive_support.then_some(cfg.positive_support_probability),
            ..Self::default()
        }
    }

    pub(crate) fn with_bracket(mut self, lo: f64, hi: f64) -> Self {
        self.lower_bracket = Some(lo);
        self.upper_bracket = Some(hi);
        self
    }

    fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.lower_bracket.is_some() {
            v.push("lower_bracket");
        }
        if self.upper_bracket.is_some() {
            v.push("upper_bracket");
        }
        if self.positivity.is_some() {
            v.push("positive_support");
        }
        v
    }

    fn evaluate(&self, nat: &FpldNatural<f64>, out: &mut [f64]) {
        let mut k = 0;
        let support = if self.lower_bracket.is_some() || self.upper_bracket.is_some() {
            Some(nat.support())
        } else {
            None
        };
        if let Some(lo) = self.lower_bracket {
            out[k] = lo - support.unwrap().lower;
            k += 1;
        }
        if let Some(hi) = self.upper_bracket {
            out[k] = support.unwrap().upper - hi;
            k += 1;
        }
        if let Some(p) = self.positivity {
            out[k] = nat.quantile_unchecked(p);
        }
    }
}

/// Minimises `objective` from `init` under `constraints` with the augmented Lagrangian.
pub(crate) fn optimise<F>(
    cfg: &FitConfig,
    init: &FpldStar<f64>,
    constraints: Constraints,
    mut objective: F,
    started: Instant,
) -> Result<FitResult>
where
    F: FnMut(&FpldNatural<f64>) -> f64,
{
    let coords = Coordinates::new(cfg);
    let names = constraints.names();
    let x0 = coords.encode(init)?;
    let res = cfg.optimizer().minimize(
        |x, c| {
            let nat = coords.decode(x).to_natural();
            constraints.evaluate(&nat, c);
            objective(&nat)
        },
        names.len(),
        &x0,
    );
    let params = coords.decode(&res.x);
    let constraint_slack = names
        .iter()
        .zip(&res.constraints)
        .map(|(n, &v)| ConstraintSlack { name: (*n).to_string(), value: v.is_finite().then_some(v) })
        .collect();
    Ok(FitResult {
        estimator: cfg.estimator,
        params,
        loss: res.f,
        converged: res.converged && res.f.is_finite(),
        evaluations: res.evaluations,
        elapsed: started.elapsed(),
        constraint_slack,
    })
}
