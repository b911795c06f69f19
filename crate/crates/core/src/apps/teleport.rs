//! Multiparty-controlled teleportation over conat channels.

use serde::Serialize;

use crate::apps::reconstruct::{gaussian_fidelity, reconstruct, ReconstructionMc};
use crate::error::{Error, Result};
use crate::heisenberg::Quadrature;
use crate::protocols::{ChannelKind, ChannelOutput};

/// Options for a teleportation run.
#[derive(Debug, Clone)]
pub struct TeleportOptions {
    /// Coherent mean `(x₀, p₀)` of the teleported input.
    pub input_mean: (f64, f64),
    /// Homodyne efficiency of the controllers; defaults to the channel's η.
    pub eta_controllers: Option<f64>,
    /// Controllers whose measurement outcome never reaches the receiver.
    pub drop_controllers: Vec<String>,
    /// Monte-Carlo pass: `(trials, seed)`.
    pub monte_carlo: Option<(usize, u64)>,
}

impl Default for TeleportOptions {
    fn default() -> Self {
        TeleportOptions {
            input_mean: (0.0, 0.0),
            eta_controllers: None,
            drop_controllers: Vec::new(),
            monte_carlo: None,
        }
    }
}

/// Result of a teleportation: excess variances in vacuum units and the
/// coherent-state fidelity `2/√((2+V_x)(2+V_p))`.
#[derive(Debug, Clone, Serialize)]
pub struct TeleportReport {
    pub receiver: String,
    pub controllers: Vec<String>,
    pub dropped: Vec<String>,
    pub v_x: f64,
    pub v_p: f64,
    pub fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<TeleportMc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TeleportMc {
    pub v_x: crate::verify::McEstimate,
    pub v_p: crate::verify::McEstimate,
    pub fidelity: f64,
    pub trials: usize,
    pub seed: u64,
}

fn by_quadrature<T>(kind: ChannelKind, copied: T, conjugate: T) -> (T, T) {
    // map (copied, conjugate) onto physical (x, p)
    match kind.copied() {
        Quadrature::X => (copied, conjugate),
        Quadrature::P => (conjugate, copied),
    }
}

fn mc_report(kind: ChannelKind, sigma2: f64, mc: ReconstructionMc) -> TeleportMc {
    let (v_x, v_p) = by_quadrature(kind, mc.v_copied, mc.v_conjugate);
    TeleportMc {
        v_x,
        v_p,
        fidelity: gaussian_fidelity(v_x.value.max(0.0), v_p.value.max(0.0), sigma2),
        trials: mc.trials,
        seed: mc.seed,
    }
}

/// Teleport a coherent state to one non-sender receiver; all other output
/// parties act as controllers and reveal the conjugate quadrature of their
/// modes.
pub fn controlled_teleport(
    channel: &ChannelOutput,
    receiver: &str,
    options: &TeleportOptions,
) -> Result<TeleportReport> {
    if receiver == channel.sender_label() {
        return Err(Error::invalid(
            "the sender cannot teleport to herself; pick another receiver".to_string(),
        ));
    }
    let eta = options.eta_controllers.unwrap_or(channel.meta.eta);
    let controllers: Vec<String> = channel
        .receivers
        .iter()
        .filter(|r| r.label != receiver)
        .map(|r| r.label.clone())
        .collect();
    for d in &options.drop_controllers {
        if !controllers.contains(d) {
            return Err(Error::invalid(format!("{d:?} is not a controller of this channel")));
        }
    }
    let cooperating: Vec<String> = controllers
        .iter()
        .filter(|c| !options.drop_controllers.contains(c))
        .cloned()
        .collect();
    let mut input_means = vec![(0.0, 0.0); channel.program.n_input_modes];
    input_means[channel.payload_input] = options.input_mean;

    let rec = reconstruct(channel, receiver, &cooperating, eta, &input_means, options.monte_carlo)?;
    let sigma2 = channel.program.vacuum_variance;
    let (v_x, v_p) = by_quadrature(channel.kind, rec.v_copied, rec.v_conjugate);
    Ok(TeleportReport {
        receiver: receiver.to_string(),
        controllers,
        dropped: rec.withheld,
        v_x,
        v_p,
        fidelity: gaussian_fidelity(v_x, v_p, sigma2),
        monte_carlo: rec.mc.map(|mc| mc_report(channel.kind, sigma2, mc)),
    })
}

/// Teleport an arbitrary two-mode coherent state through the channel pair
/// of one superdense run: the PQ side reconstructs like an individual PQ
/// channel, the MQ side like an individual MQ channel.
pub fn controlled_teleport_two_mode(
    pq: &ChannelOutput,
    mq: &ChannelOutput,
    receiver: &str,
    input_mean: ((f64, f64), (f64, f64)),
    eta_controllers: Option<f64>,
    monte_carlo: Option<(usize, u64)>,
) -> Result<(TeleportReport, TeleportReport)> {
    if pq.kind != ChannelKind::Pq || mq.kind != ChannelKind::Mq {
        return Err(Error::invalid("expected a (PQ, MQ) channel pair".to_string()));
    }
    if pq.meta.topology != mq.meta.topology
        || pq.program.n_slots() != mq.program.n_slots()
        || pq.meta.r != mq.meta.r
    {
        return Err(Error::invalid(
            "the PQ and MQ outputs do not come from the same superdense run".to_string(),
        ));
    }
    let (mq_mean, pq_mean) = input_mean;
    let run_side = |channel: &ChannelOutput| -> Result<TeleportReport> {
        if receiver == channel.sender_label() {
            return Err(Error::invalid(
                "the sender cannot teleport to herself; pick another receiver".to_string(),
            ));
        }
        let eta = eta_controllers.unwrap_or(channel.meta.eta);
        let controllers: Vec<String> = channel
            .receivers
            .iter()
            .filter(|r| r.label != receiver)
            .map(|r| r.label.clone())
            .collect();
        // payload 0 carries the MQ mode, payload 1 the PQ mode
        let input_means = vec![mq_mean, pq_mean];
        let rec = reconstruct(channel, receiver, &controllers, eta, &input_means, monte_carlo)?;
        let sigma2 = channel.program.vacuum_variance;
        let (v_x, v_p) = by_quadrature(channel.kind, rec.v_copied, rec.v_conjugate);
        Ok(TeleportReport {
            receiver: receiver.to_string(),
            controllers,
            dropped: vec![],
            v_x,
            v_p,
            fidelity: gaussian_fidelity(v_x, v_p, sigma2),
            monte_carlo: rec.mc.map(|mc| mc_report(channel.kind, sigma2, mc)),
        })
    };
    Ok((run_side(pq)?, run_side(mq)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{ccaecc_pq, superdense_conat, Topology};
    use approx::assert_abs_diff_eq;

    fn star3() -> Topology {
        Topology::new(["A", "B", "C"], "A", [("A", "B"), ("A", "C")])
    }

    fn chain3() -> Topology {
        Topology::new(["A", "B", "C"], "A", [("A", "B"), ("B", "C")])
    }

    #[test]
    fn ideal_channel_teleports_with_unit_fidelity() {
        let channel = ccaecc_pq(3, 10.0, 1.0).unwrap();
        let report =
            controlled_teleport(&channel, "B", &TeleportOptions::default()).unwrap();
        assert!((report.fidelity - 1.0).abs() < 1e-6);
        assert!(report.v_x < 1e-6 && report.v_p < 1e-6);
    }

    #[test]
    fn zero_squeezing_fidelity_is_two_over_root_24() {
        // V_x = 2, V_p = 4 at r = 0, η = 1 for three receivers
        let channel = ccaecc_pq(3, 0.0, 1.0).unwrap();
        let report =
            controlled_teleport(&channel, "B", &TeleportOptions::default()).unwrap();
        assert_abs_diff_eq!(report.v_x, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.v_p, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.fidelity, 2.0 / 24.0_f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn withholding_a_controller_injects_antisqueezed_noise() {
        let v_p_at = |r: f64| {
            let channel = ccaecc_pq(3, r, 1.0).unwrap();
            let opts = TeleportOptions {
                drop_controllers: vec!["C".to_string()],
                ..TeleportOptions::default()
            };
            controlled_teleport(&channel, "B", &opts).unwrap().v_p
        };
        let full = controlled_teleport(
            &ccaecc_pq(3, 1.0, 1.0).unwrap(),
            "B",
            &TeleportOptions::default(),
        )
        .unwrap();
        assert!(v_p_at(1.0) > full.v_p);
        // the antisqueezed term grows with r
        assert!(v_p_at(2.0) > v_p_at(1.0));
        assert!(v_p_at(2.0) > (2.0 * 2.0_f64).exp() / 2.0);
    }

    #[test]
    fn fidelity_is_monotone_in_r_and_eta() {
        let mut last = 0.0;
        for i in 0..20 {
            let r = 0.15 * i as f64;
            let channel = ccaecc_pq(3, r, 1.0).unwrap();
            let f = controlled_teleport(&channel, "B", &TeleportOptions::default())
                .unwrap()
                .fidelity;
            assert!(f >= last - 1e-12, "fidelity dropped at r = {r}");
            last = f;
        }
        let mut last = 0.0;
        for eta in [0.5, 0.7, 0.9, 1.0] {
            let channel = ccaecc_pq(3, 1.0, eta).unwrap();
            let f = controlled_teleport(&channel, "B", &TeleportOptions::default())
                .unwrap()
                .fidelity;
            assert!(f >= last - 1e-12, "fidelity dropped at eta = {eta}");
            last = f;
        }
    }

    #[test]
    fn receiver_validation() {
        let channel = ccaecc_pq(3, 1.0, 1.0).unwrap();
        assert!(controlled_teleport(&channel, "A", &TeleportOptions::default()).is_err());
        assert!(controlled_teleport(&channel, "Z", &TeleportOptions::default()).is_err());
        let opts = TeleportOptions {
            drop_controllers: vec!["Q".to_string()],
            ..TeleportOptions::default()
        };
        assert!(controlled_teleport(&channel, "B", &opts).is_err());
    }

    #[test]
    fn two_mode_star_at_strong_squeezing_is_ideal() {
        let (pq, mq) = superdense_conat(&star3(), 10.0).unwrap();
        let (rp, rm) = controlled_teleport_two_mode(
            &pq,
            &mq,
            "B",
            ((0.1, 0.2), (0.3, -0.4)),
            None,
            None,
        )
        .unwrap();
        assert!((rp.fidelity - 1.0).abs() < 1e-6);
        assert!((rm.fidelity - 1.0).abs() < 1e-6);
    }

    #[test]
    fn two_mode_star_noise_at_unit_distance() {
        let (pq, mq) = superdense_conat(&star3(), 1.0).unwrap();
        let (rp, _) = controlled_teleport_two_mode(
            &pq,
            &mq,
            "B",
            ((0.0, 0.0), (0.0, 0.0)),
            None,
            None,
        )
        .unwrap();
        let e2 = (-2.0_f64).exp();
        assert_abs_diff_eq!(rp.v_x, 2.0 * e2, epsilon = 1e-12);
        assert_abs_diff_eq!(rp.v_p, 4.0 * e2, epsilon = 1e-12);
    }

    #[test]
    fn star_beats_chain_for_the_far_receiver() {
        for r in [0.3, 0.8, 1.5] {
            let (pq_star, mq_star) = superdense_conat(&star3(), r).unwrap();
            let (pq_chain, mq_chain) = superdense_conat(&chain3(), r).unwrap();
            let zero = ((0.0, 0.0), (0.0, 0.0));
            let (sp, sm) =
                controlled_teleport_two_mode(&pq_star, &mq_star, "C", zero, None, None).unwrap();
            let (cp, cm) =
                controlled_teleport_two_mode(&pq_chain, &mq_chain, "C", zero, None, None).unwrap();
            assert!(sp.fidelity >= cp.fidelity + 1e-12);
            assert!(sm.fidelity >= cm.fidelity + 1e-12);
        }
    }

    #[test]
    fn mismatched_channel_pairs_are_rejected() {
        let (pq, _) = superdense_conat(&star3(), 1.0).unwrap();
        let (_, mq_other) = superdense_conat(&chain3(), 1.0).unwrap();
        let zero = ((0.0, 0.0), (0.0, 0.0));
        assert!(controlled_teleport_two_mode(&pq, &mq_other, "B", zero, None, None).is_err());
        let (pq2, _) = superdense_conat(&star3(), 1.0).unwrap();
        assert!(controlled_teleport_two_mode(&pq, &pq2, "B", zero, None, None).is_err());
    }

    #[test]
    fn monte_carlo_agrees_with_the_exact_variances() {
        let channel = ccaecc_pq(3, 0.7, 0.9).unwrap();
        let opts = TeleportOptions {
            input_mean: (1.2, -0.8),
            monte_carlo: Some((20_000, 21)),
            ..TeleportOptions::default()
        };
        let report = controlled_teleport(&channel, "C", &opts).unwrap();
        let mc = report.monte_carlo.unwrap();
        assert!(mc.v_x.within(report.v_x, 3.0), "{} vs {}", mc.v_x.value, report.v_x);
        assert!(mc.v_p.within(report.v_p, 3.0), "{} vs {}", mc.v_p.value, report.v_p);
    }
}
