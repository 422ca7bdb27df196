//! Marginal estimators for the FPLD and two-parameter baselines.
//!
//! All three FPLD estimators share the grid-search start, the unconstrained
//! coordinates and the augmented-Lagrangian Nelder-Mead driver; only the
//! objective differs.

mod baselines;
mod config;
mod driver;
mod likelihood;
mod mq;
mod quantiles;
mod result;
mod starship;

pub use baselines::{fit_gamma_ml, fit_lognormal_ml, GammaFit, LognormalFit};
pub use config::{Estimator, FitConfig};
pub use likelihood::{fit_ml, log_likelihood};
pub use mq::{fit_mq, grid_search, grid_search_init, mq_loss, GridSearch};
pub use quantiles::{empirical_quantiles, QuantileSet};
pub use result::{ConstraintSlack, FitResult};
pub use starship::{anderson_darling, fit_starship};

use crate::error::Result;

/// Fits the estimator selected in `cfg` to raw observations.
pub fn fit(y: &[f64], cfg: &FitConfig) -> Result<FitResult> {
    match cfg.estimator {
        Estimator::Mq => fit_mq(&empirical_quantiles(y)?, cfg),
        Estimator::Ml => fit_ml(y, cfg),
        Estimator::Starship => fit_starship(y, cfg),
    }
}
