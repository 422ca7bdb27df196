//! Derivative-free minimisation: Nelder-Mead simplex and an augmented
//! Lagrangian wrapper for inequality constraints `c(x) ≥ 0`.

mod auglag;
mod nelder_mead;

pub use auglag::{AugLag, AugLagResult};
pub use nelder_mead::{Minimum, NelderMead};
