//! Numeric covariance-matrix engine with stochastic homodyne outcomes.
//!
//! States are Gaussian: a mean vector and a covariance matrix over the `2n`
//! quadratures in interleaved order `x₁, p₁, …, xₙ, pₙ`. The engine
//! cross-validates the symbolic one by Monte-Carlo and provides state-level
//! quantities (conditional states, samples) the symbolic engine does not.

mod bridge;
mod state;

pub use bridge::{covariance_of_forms, from_heisenberg, FormMoments};
pub use state::{symplectic_form, GaussianState};
