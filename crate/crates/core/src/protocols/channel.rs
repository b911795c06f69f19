//! Channel outputs: the result of running a conat-channel construction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{LinearForm, Quadrature, QuadratureRegister};
use crate::protocols::program::CircuitProgram;
use crate::protocols::topology::Topology;

/// Which quadrature the channel copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelKind {
    #[serde(rename = "PQ")]
    Pq,
    #[serde(rename = "MQ")]
    Mq,
}

impl ChannelKind {
    /// The quadrature copied to every receiver.
    pub fn copied(self) -> Quadrature {
        match self {
            ChannelKind::Pq => Quadrature::X,
            ChannelKind::Mq => Quadrature::P,
        }
    }

    /// The conjugate quadrature, whose collective sum carries the message.
    pub fn conjugate(self) -> Quadrature {
        self.copied().conjugate()
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelKind::Pq => write!(f, "PQ"),
            ChannelKind::Mq => write!(f, "MQ"),
        }
    }
}

/// One output party of a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Receiver {
    pub label: String,
    /// Mode slot in the program/register.
    pub slot: usize,
}

/// Protocol metadata; enough to re-run the construction deterministically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelMeta {
    pub protocol: String,
    pub n_receivers: usize,
    pub r: f64,
    pub eta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<Topology>,
}

/// The result of a channel construction: the executed program, the exact
/// symbolic register, and the role assignment of the output modes. The
/// sender is also among the receivers and comes first.
#[derive(Debug, Clone)]
pub struct ChannelOutput {
    pub kind: ChannelKind,
    pub program: CircuitProgram,
    pub register: QuadratureRegister,
    pub receivers: Vec<Receiver>,
    /// Input-mode id of the payload this channel transports.
    pub payload_input: usize,
    pub meta: ChannelMeta,
}

impl ChannelOutput {
    /// Run `program` symbolically and wrap the result.
    pub fn from_program(
        kind: ChannelKind,
        program: CircuitProgram,
        receivers: Vec<Receiver>,
        payload_input: usize,
        meta: ChannelMeta,
    ) -> Result<Self> {
        if receivers.is_empty() {
            return Err(Error::invalid("a channel needs at least one receiver".to_string()));
        }
        let register = program.run_symbolic()?;
        for recv in &receivers {
            register.mode(recv.slot)?;
        }
        Ok(ChannelOutput { kind, program, register, receivers, payload_input, meta })
    }

    /// The sender's output mode slot.
    pub fn sender_slot(&self) -> usize {
        self.receivers[0].slot
    }

    pub fn sender_label(&self) -> &str {
        &self.receivers[0].label
    }

    /// Receivers other than the sender, in party order.
    pub fn non_sender_receivers(&self) -> &[Receiver] {
        &self.receivers[1..]
    }

    pub fn receiver(&self, label: &str) -> Option<&Receiver> {
        self.receivers.iter().find(|r| r.label == label)
    }

    /// The symbolic payload form (`x̂_A` for PQ, `p̂_A` for MQ).
    pub fn payload_form(&self, q: Quadrature) -> Result<LinearForm> {
        self.register.input_form(self.payload_input, q)
    }
}
