//! Executable constraint suites for the channel definitions.
//!
//! A PQ conat channel must copy the sender's position to every receiver
//! with bounded noise and leave the conjugate message recoverable from the
//! collective momentum sum; the MQ channel is the dual. This module
//! measures those ε values on a [`ChannelOutput`](crate::ChannelOutput),
//! compares them against the closed-form predictions, and cross-validates
//! the symbolic engine against the covariance bridge and Monte-Carlo runs.

mod cross;
mod epsilon;
mod montecarlo;

pub use cross::{cross_validate, AgreementReport};
pub use epsilon::{
    check_mq_definition, check_pq_definition, predicted_epsilons, CommutatorReport,
    EpsilonReport, Method, NoiseForms, PredictedEpsilons,
};
pub use montecarlo::{mc_epsilons, McEpsilons, McEstimate};
