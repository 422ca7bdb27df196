//! Five-parameter lambda distribution (FPLD) toolkit.

pub mod dist;
pub mod error;
pub mod estimation;
pub mod optim;
pub mod pipeline;
pub mod quantreg;
pub mod scalar;
pub mod scoring;
pub mod simstudy;

pub use dist::{
    fpld_from_gpd_pair, FpldNatural, FpldParams, FpldStar, FpldUnconstrained, GpdParams, Parametrisation,
    SupportInterval,
};
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision FPLD in the natural parametrisation.
pub type Fpld = FpldNatural<f64>;
/// Single-precision FPLD in the natural parametrisation.
pub type Fpld32 = FpldNatural<f32>;
pub type FpldStar64 = FpldStar<f64>;
pub type FpldStar32 = FpldStar<f32>;
