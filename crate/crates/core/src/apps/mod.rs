//! Applications built on channel outputs: multiparty-controlled
//! teleportation (one- and two-mode) and quantum secret sharing of
//! classical continuous values.
//!
//! Both applications share one reconstruction primitive: every cooperating
//! output party homodynes the conjugate quadrature of its mode and sends
//! the outcome to the designated receiver, who displaces by the sum. The
//! copied quadrature arrives through the channel itself; the conjugate is
//! recovered from the collective constraint.

mod qss;
mod reconstruct;
mod teleport;

pub use qss::{qss_classical, QssOptions, QssReport};
pub use reconstruct::ReconstructionMc;
pub use teleport::{
    controlled_teleport, controlled_teleport_two_mode, TeleportOptions, TeleportReport,
};
