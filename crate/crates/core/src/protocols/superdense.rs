//! Multiparty coherent superdense coding over a tree of EPR pairs.
//!
//! The sender holds two payload modes; each edge of the party tree is one
//! EPR pair. Per outgoing edge the sender couples payload 2 (QND) and
//! payload 1 (QND with phase adjust) into her local EPR half and ships it
//! down the edge. A receiving party phase-flips its own half, absorbs the
//! received mode with a QND interaction, and relays the same pattern into
//! each child edge. One run produces two channels at once: the PQ channel
//! lives on payload 2 and the parties' own EPR halves, the MQ channel on
//! payload 1 and the relayed modes.

use crate::error::{Error, Result};
use crate::protocols::channel::{ChannelKind, ChannelMeta, ChannelOutput, Receiver};
use crate::protocols::ghz::helmert_matrix;
use crate::protocols::program::{CircuitProgram, Step};
use crate::protocols::topology::Topology;

/// Mode-slot layout of a superdense run.
///
/// Slots 0 and 1 are the payload input modes (the MQ and PQ payloads).
/// Edge `k` owns slots `2 + 2k` (the half at the parent, relayed to the
/// child) and `3 + 2k` (the half prepared at the child).
#[derive(Debug, Clone)]
pub struct SuperdenseLayout {
    /// Party labels, sender first, then the remaining parties in topology
    /// order.
    pub party_order: Vec<String>,
    /// MQ-channel output slot per party (same order as `party_order`).
    pub mq_slots: Vec<usize>,
    /// PQ-channel output slot per party.
    pub pq_slots: Vec<usize>,
    /// Path length from the sender per party.
    pub distances: Vec<usize>,
}

pub fn edge_near_slot(edge: usize) -> usize {
    2 + 2 * edge
}

pub fn edge_far_slot(edge: usize) -> usize {
    3 + 2 * edge
}

/// The QND/phase program over the rooted tree, excluding resource
/// preparation. Also returns the output-role layout.
pub fn superdense_body(topology: &Topology) -> Result<(Vec<Step>, SuperdenseLayout)> {
    let rooted = topology.rooted()?;
    let root = topology.party_index(&topology.sender).unwrap();

    let mut steps = Vec::new();
    for &party in &rooted.bfs_order {
        if party == root {
            for &edge in &rooted.child_edges[party] {
                let near = edge_near_slot(edge);
                steps.push(Step::Qnd { control: 1, target: near });
                steps.push(Step::QndPhaseAdjust { control: 0, target: near });
            }
        } else {
            let parent = rooted.parent_edge[party].expect("non-root party has a parent edge");
            let received = edge_near_slot(parent);
            let own = edge_far_slot(parent);
            steps.push(Step::PhasePi { mode: own });
            steps.push(Step::Qnd { control: received, target: own });
            for &edge in &rooted.child_edges[party] {
                let near = edge_near_slot(edge);
                steps.push(Step::Qnd { control: own, target: near });
                steps.push(Step::QndPhaseAdjust { control: received, target: near });
            }
        }
    }

    let mut party_order = vec![topology.sender.clone()];
    let mut mq_slots = vec![0];
    let mut pq_slots = vec![1];
    let mut distances = vec![0];
    for (idx, label) in topology.parties.iter().enumerate() {
        if idx == root {
            continue;
        }
        let parent = rooted.parent_edge[idx].expect("validated tree");
        party_order.push(label.clone());
        mq_slots.push(edge_near_slot(parent));
        pq_slots.push(edge_far_slot(parent));
        distances.push(rooted.distances[idx]);
    }
    Ok((steps, SuperdenseLayout { party_order, mq_slots, pq_slots, distances }))
}

/// Run the superdense construction. Returns the PQ channel (payload 2,
/// copied positions) and the MQ channel (payload 1, copied momenta).
///
/// `r_default` applies to every edge without a squeezing override in the
/// topology.
pub fn superdense_conat(topology: &Topology, r_default: f64) -> Result<(ChannelOutput, ChannelOutput)> {
    let (body, layout) = superdense_body(topology)?;
    let n_edges = topology.edges.len();
    let mut factors = Vec::with_capacity(2 * n_edges);
    for k in 0..n_edges {
        let r = topology.edge_squeezing(k, r_default);
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::invalid(format!("edge {k}: squeezing must be ≥ 0, got {r}")));
        }
        factors.push(r.exp());
        factors.push((-r).exp());
    }
    let mut program = CircuitProgram::new(2, factors);
    for k in 0..n_edges {
        program.push(Step::OrthogonalMixing {
            modes: vec![edge_near_slot(k), edge_far_slot(k)],
            matrix: helmert_matrix(2),
        });
    }
    program.steps.extend(body);

    let meta = ChannelMeta {
        protocol: "superdense".to_string(),
        n_receivers: topology.n_parties(),
        r: r_default,
        eta: 1.0,
        topology: Some(topology.clone()),
    };
    let receivers = |slots: &[usize]| -> Vec<Receiver> {
        layout
            .party_order
            .iter()
            .zip(slots)
            .map(|(label, &slot)| Receiver { label: label.clone(), slot })
            .collect()
    };
    let pq = ChannelOutput::from_program(
        ChannelKind::Pq,
        program.clone(),
        receivers(&layout.pq_slots),
        1,
        meta.clone(),
    )?;
    let mq =
        ChannelOutput::from_program(ChannelKind::Mq, program, receivers(&layout.mq_slots), 0, meta)?;
    Ok((pq, mq))
}
