//! Forecast evaluation: closed-form CRPS for FPLD forecasts, a quadrature
//! reference, PIT calibration errors, skill scores and a paired permutation test.

mod crps;
mod permutation;
mod pit;
mod quadrature;
mod skill;

pub use crps::{crps_fpld, crps_fpld_given_level, mean_crps, mean_crps_single, pairwise_sum, CrpsValue};
pub use permutation::permutation_test_crps;
pub use pit::{pit_errors, pit_values, qq_points, PitErrors};
pub use quadrature::{crps_quadrature, crps_quadrature_fpld, integrate_adaptive};
pub use skill::{skill_score, SkillMode};
