//! Simulation study comparing the estimators on random FPLD truths.

mod run;
mod sampler;

pub use run::{run_simulation, summarise, SimCell, SimConfig, SimReport, SimRow};
pub use sampler::{parameter_mse, sample_lambda_star, sample_lambda_star_with};
