//! Resource preparation and the two channel constructions.
//!
//! Protocols are written once as [`CircuitProgram`]s — abstract gate and
//! feed-forward sequences over a fixed mode layout — and executed on either
//! engine: symbolically (exact linear forms) or numerically (covariance
//! propagation with stochastic homodyne outcomes). Running the same program
//! on both engines is what makes the cross-validation meaningful.

mod ccaecc;
mod channel;
mod ghz;
mod program;
mod superdense;
mod topology;

pub use ccaecc::{ccaecc_mq, ccaecc_pq, ccaecc_program, party_label};
pub use channel::{ChannelKind, ChannelMeta, ChannelOutput, Receiver};
pub use ghz::{
    epr_program, ghz_mq_program, ghz_program, helmert_matrix, prepare_epr, prepare_epr_state,
    prepare_ghz, prepare_ghz_mq_variant, prepare_ghz_mq_variant_state, prepare_ghz_state,
};
pub use program::{CircuitProgram, FeedForwardTarget, GaussianRun, Step};
pub use superdense::{superdense_body, superdense_conat, SuperdenseLayout};
pub use topology::{validate_topology, RootedTree, Topology, TopologyReport};
