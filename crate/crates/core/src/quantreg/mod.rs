//! Linear quantile regression over a probability grid and the two-step
//! distributional fit of the FPLD to the predicted quantiles.

mod bundle;
mod design;
mod solver;

pub use bundle::{bundle_probabilities, distributional_fit, fit_bundle, predict_quantiles, QuantileFitBundle};
pub use design::{standardize, Design, Standardization};
pub use solver::{check_loss, fit_quantile_regression, total_check_loss, QuantileFit};
