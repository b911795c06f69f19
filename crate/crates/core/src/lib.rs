//! Simulator for multiparty coherent (conat) channels with continuous
//! variables.
//!
//! The crate models optical quadrature networks in two complementary ways:
//!
//! * [`heisenberg`] — an exact symbolic engine. Every quadrature is a linear
//!   combination of initial-basis operators, every gate is a linear
//!   substitution, and channel noise variances come out in closed form.
//! * [`gaussian`] — a numeric covariance-matrix engine with stochastic
//!   homodyne outcomes, used to cross-validate the symbolic engine by
//!   Monte-Carlo and to compute state-level quantities such as fidelity.
//!
//! On top of the engines, [`protocols`] implements entanglement preparation
//! (GHZ states, EPR pairs) and the two channel constructions — CCAECC over
//! GHZ entanglement and coherent superdense coding over EPR-pair trees.
//! [`verify`] turns the channel definitions into executable constraint
//! suites, and [`apps`] builds controlled teleportation and quantum secret
//! sharing on top of the channels.

pub mod apps;
pub mod error;
pub mod gaussian;
pub mod heisenberg;
pub mod protocols;
pub mod verify;

pub use error::{Error, Result};
pub use gaussian::{from_heisenberg, GaussianState};
pub use heisenberg::{BasisLabel, LabelKind, LinearForm, Quadrature, QuadratureRegister};
pub use protocols::{
    ccaecc_mq, ccaecc_pq, prepare_epr, prepare_ghz, prepare_ghz_mq_variant, superdense_conat,
    validate_topology, ChannelKind, ChannelOutput, CircuitProgram, Step, Topology,
};
pub use verify::{check_mq_definition, check_pq_definition, predicted_epsilons, EpsilonReport};

/// Default vacuum quadrature variance. This convention makes the squeezed
/// EPR correlations come out as `2 e^{-2r}` in vacuum units.
pub const VACUUM_VARIANCE: f64 = 1.0;

/// Coefficients below this magnitude are dropped from linear forms after
/// register operations.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Tolerance for symplectic-form and commutator checks.
pub const SYMPLECTIC_TOL: f64 = 1e-9;
