//! Multiparty coherent communication assisted by entanglement and classical
//! communication (CCAECC).
//!
//! The sender holds a symbolic input mode plus two modes of an
//! `(n+1)`-mode GHZ state; every other receiver holds one GHZ mode. The
//! sender mixes the input with the first GHZ mode on a balanced beam
//! splitter, homodynes both output ports, and the parties displace their
//! modes by the broadcast outcomes. The result copies one quadrature of the
//! input to all `n` receivers while the conjugate quadratures jointly carry
//! the message.

use crate::error::{Error, Result};
use crate::protocols::channel::{ChannelKind, ChannelMeta, ChannelOutput, Receiver};
use crate::protocols::ghz::helmert_matrix;
use crate::protocols::program::{CircuitProgram, FeedForwardTarget, Step};

/// Generated party labels: the sender is `A`, receivers continue `B`, `C`, …
pub fn party_label(index: usize) -> String {
    if index < 26 {
        char::from(b'A' + index as u8).to_string()
    } else {
        format!("P{index}")
    }
}

fn check_params(n: usize, r: f64, eta: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("CCAECC needs at least 2 receivers, got n = {n}")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("squeezing parameter must be ≥ 0, got {r}")));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid(format!("homodyne efficiency {eta} outside (0, 1]")));
    }
    Ok(())
}

/// The CCAECC circuit for `n` receivers.
///
/// Mode layout: slot 0 is the symbolic input mode A; slots `1..=n+1` hold
/// the GHZ modes `A₁, A₂, B, …, N`. For the PQ channel the sender measures
/// the x-difference port and feeds `√2` times the outcome to every
/// receiver's position, then measures the p-sum port and feeds it to her
/// own retained mode. The MQ channel is the same construction on the
/// Fourier-image resource with the roles of x and p exchanged.
pub fn ccaecc_program(n: usize, r: f64, eta: f64, kind: ChannelKind) -> Result<CircuitProgram> {
    check_params(n, r, eta)?;
    let ghz_modes = n + 1;
    let mut factors = vec![r.exp()];
    factors.extend(std::iter::repeat((-r).exp()).take(ghz_modes - 1));
    let mut program = CircuitProgram::new(1, factors);
    program.push(Step::OrthogonalMixing {
        modes: (1..=ghz_modes).collect(),
        matrix: helmert_matrix(ghz_modes),
    });
    if kind == ChannelKind::Mq {
        for m in 1..=ghz_modes {
            program.push(Step::Fourier { mode: m });
        }
    }
    program.push(Step::BeamSplitter { a: 0, b: 1, transmissivity: 0.5 });

    let copied = kind.copied();
    let conjugate = kind.conjugate();
    let gain = 2.0_f64.sqrt();
    // difference port (slot 0) → all receiver modes
    let broadcast: Vec<FeedForwardTarget> = (2..=ghz_modes)
        .map(|m| FeedForwardTarget { mode: m, quadrature: copied, gain })
        .collect();
    program.push(Step::HomodyneFeedForward {
        mode: 0,
        quadrature: copied,
        targets: broadcast,
        eta,
    });
    // sum port (slot 1) → the sender's retained mode only
    program.push(Step::HomodyneFeedForward {
        mode: 1,
        quadrature: conjugate,
        targets: vec![FeedForwardTarget { mode: 2, quadrature: conjugate, gain }],
        eta,
    });
    Ok(program)
}

fn ccaecc(n: usize, r: f64, eta: f64, kind: ChannelKind) -> Result<ChannelOutput> {
    let program = ccaecc_program(n, r, eta, kind)?;
    let receivers: Vec<Receiver> =
        (0..n).map(|i| Receiver { label: party_label(i), slot: i + 2 }).collect();
    let meta = ChannelMeta {
        protocol: "ccaecc".to_string(),
        n_receivers: n,
        r,
        eta,
        topology: None,
    };
    ChannelOutput::from_program(kind, program, receivers, 0, meta)
}

/// The `n`-receiver position-quadrature conat channel.
pub fn ccaecc_pq(n: usize, r: f64, eta: f64) -> Result<ChannelOutput> {
    ccaecc(n, r, eta, ChannelKind::Pq)
}

/// The `n`-receiver momentum-quadrature conat channel.
pub fn ccaecc_mq(n: usize, r: f64, eta: f64) -> Result<ChannelOutput> {
    ccaecc(n, r, eta, ChannelKind::Mq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::{BasisLabel, LinearForm, Quadrature, QuadratureRegister};
    use approx::assert_abs_diff_eq;

    /// Reconstruct the expected output forms from a fresh GHZ register and
    /// compare symbol-for-symbol: x_{A'} = x_A − (x_{A₁} − x_{A₂}), etc.
    #[test]
    fn three_party_pq_outputs_match_the_reference_forms() {
        let r = 0.8;
        let out = ccaecc_pq(3, r, 1.0).unwrap();
        let reg = &out.register;

        // fresh resource register with the same layout, before the protocol
        let fresh = {
            let program = ccaecc_program(3, r, 1.0, ChannelKind::Pq).unwrap();
            let mut p = program.clone();
            p.steps.truncate(1); // GHZ mixing only
            p.run_symbolic().unwrap()
        };
        let x_a = fresh.x_form(0).unwrap();
        let p_a = fresh.p_form(0).unwrap();
        let (xa1, xa2, xb, xc) = (
            fresh.x_form(1).unwrap(),
            fresh.x_form(2).unwrap(),
            fresh.x_form(3).unwrap(),
            fresh.x_form(4).unwrap(),
        );
        let (pa1, pa2, pb, pc) = (
            fresh.p_form(1).unwrap(),
            fresh.p_form(2).unwrap(),
            fresh.p_form(3).unwrap(),
            fresh.p_form(4).unwrap(),
        );

        let combine = |terms: &[(&LinearForm, f64)]| {
            let mut f = LinearForm::zero();
            for (form, c) in terms {
                f.add_scaled(form, *c);
            }
            f
        };
        // x_{A'} = x_A − (x_{A₁} − x_{A₂})
        let expected = combine(&[(x_a, 1.0), (xa1, -1.0), (xa2, 1.0)]);
        assert!(reg.x_form(2).unwrap().max_coefficient_distance(&expected) < 1e-12);
        // x_{B'} = x_A − (x_{A₁} − x_B), x_{C'} likewise
        let expected = combine(&[(x_a, 1.0), (xa1, -1.0), (xb, 1.0)]);
        assert!(reg.x_form(3).unwrap().max_coefficient_distance(&expected) < 1e-12);
        let expected = combine(&[(x_a, 1.0), (xa1, -1.0), (xc, 1.0)]);
        assert!(reg.x_form(4).unwrap().max_coefficient_distance(&expected) < 1e-12);
        // p_{A'} = p_A + (p_{A₁} + p_{A₂} + p_B + p_C) − p_B − p_C
        let expected = combine(&[(p_a, 1.0), (pa1, 1.0), (pa2, 1.0)]);
        assert!(reg.p_form(2).unwrap().max_coefficient_distance(&expected) < 1e-12);
        // p_{B'} = p_B, p_{C'} = p_C
        assert!(reg.p_form(3).unwrap().max_coefficient_distance(pb) < 1e-12);
        assert!(reg.p_form(4).unwrap().max_coefficient_distance(pc) < 1e-12);
        assert!(reg.symplectic_check().pass);
    }

    #[test]
    fn eta_below_one_adds_the_common_detector_terms() {
        let (r, eta) = (1.0, 0.8);
        let out = ccaecc_pq(3, r, eta).unwrap();
        let reg = &out.register;
        let x_det = BasisLabel::detector(0, Quadrature::X);
        let p_det = BasisLabel::detector(1, Quadrature::P);
        let mag = (2.0 * (1.0 - eta) / eta).sqrt();
        for slot in [2, 3, 4] {
            assert_abs_diff_eq!(
                reg.x_form(slot).unwrap().coefficient(&x_det).abs(),
                mag,
                epsilon = 1e-12
            );
        }
        assert_abs_diff_eq!(
            reg.p_form(2).unwrap().coefficient(&p_det).abs(),
            mag,
            epsilon = 1e-12
        );
        assert_eq!(reg.p_form(3).unwrap().coefficient(&p_det), 0.0);
    }

    #[test]
    fn pq_noise_variances_match_the_closed_forms() {
        for r in [0.0, 0.5, 1.0] {
            for eta in [1.0, 0.9] {
                let out = ccaecc_pq(3, r, eta).unwrap();
                let reg = &out.register;
                let e2 = (-2.0 * r).exp();
                // sender-output-referenced receiver noise
                for slot in [3, 4] {
                    let diff = reg.x_form(slot).unwrap() - reg.x_form(2).unwrap();
                    assert_abs_diff_eq!(
                        reg.variance_of(&diff).unwrap(),
                        2.0 * e2,
                        epsilon = 1e-12
                    );
                }
                // collective conjugate noise: p_{A'} − p_A + p_{B'} + p_{C'}
                let mut coll = reg.p_form(2).unwrap().clone();
                coll.add_scaled(reg.p_form(3).unwrap(), 1.0);
                coll.add_scaled(reg.p_form(4).unwrap(), 1.0);
                coll.add_scaled(&out.payload_form(Quadrature::P).unwrap(), -1.0);
                let expected = 4.0 * e2 + 2.0 * (1.0 - eta) / eta;
                assert_abs_diff_eq!(reg.variance_of(&coll).unwrap(), expected, epsilon = 1e-12);
            }
        }
    }

    /// r = 1, η = 0.9: Var(p_{A'}+p_{B'}+p_{C'}−p_A) = 4e^{−2} + 2/9.
    #[test]
    fn collective_noise_example_value() {
        let out = ccaecc_pq(3, 1.0, 0.9).unwrap();
        let reg = &out.register;
        let mut coll = reg.p_form(2).unwrap().clone();
        coll.add_scaled(reg.p_form(3).unwrap(), 1.0);
        coll.add_scaled(reg.p_form(4).unwrap(), 1.0);
        coll.add_scaled(&out.payload_form(Quadrature::P).unwrap(), -1.0);
        let v = reg.variance_of(&coll).unwrap();
        assert_abs_diff_eq!(v, 0.763563, epsilon = 1e-6);
    }

    /// Noise relative to the sender's own output: 2e^{−2} ≈ 0.270671.
    #[test]
    fn receiver_noise_example_value() {
        let out = ccaecc_pq(3, 1.0, 1.0).unwrap();
        let reg = &out.register;
        let diff = reg.x_form(3).unwrap() - reg.x_form(2).unwrap();
        assert_abs_diff_eq!(reg.variance_of(&diff).unwrap(), 0.270671, epsilon = 1e-6);
    }

    #[test]
    fn mq_channel_is_the_dual_construction() {
        let r = 0.7;
        let out = ccaecc_mq(3, r, 1.0).unwrap();
        let reg = &out.register;
        let e2 = (-2.0 * r).exp();
        // ⟨(p_{B'} − p_{A'})²⟩ = 2e^{−2r}
        let diff = reg.p_form(3).unwrap() - reg.p_form(2).unwrap();
        assert_abs_diff_eq!(reg.variance_of(&diff).unwrap(), 2.0 * e2, epsilon = 1e-12);
        // collective x noise
        let mut coll = reg.x_form(2).unwrap().clone();
        coll.add_scaled(reg.x_form(3).unwrap(), 1.0);
        coll.add_scaled(reg.x_form(4).unwrap(), 1.0);
        coll.add_scaled(&out.payload_form(Quadrature::X).unwrap(), -1.0);
        assert_abs_diff_eq!(reg.variance_of(&coll).unwrap(), 4.0 * e2, epsilon = 1e-12);
        // momentum copied: p_{B'} − p_A is input-free with zero mean
        let noise = reg.p_form(3).unwrap() - &out.payload_form(Quadrature::P).unwrap();
        assert!(noise.is_input_free());
    }

    #[test]
    fn strong_squeezing_approaches_the_ideal_channel() {
        let out = ccaecc_mq(3, 20.0, 1.0).unwrap();
        let reg = &out.register;
        let diff = reg.p_form(3).unwrap() - reg.p_form(2).unwrap();
        assert!(reg.variance_of(&diff).unwrap() < 1e-12);
    }

    #[test]
    fn transmitted_signal_cancels_in_receiver_noise_differences() {
        for n in 2..=5 {
            let out = ccaecc_pq(n, 0.6, 0.85).unwrap();
            let reg = &out.register;
            let x_a = out.payload_form(Quadrature::X).unwrap();
            for recv in &out.receivers {
                let noise = reg.x_form(recv.slot).unwrap() - &x_a;
                assert!(noise.is_input_free(), "residual input labels for {}", recv.label);
            }
        }
    }

    #[test]
    fn general_n_scaling_of_the_collective_noise() {
        let (r, eta) = (0.5, 0.9);
        for n in 2..=6 {
            let out = ccaecc_pq(n, r, eta).unwrap();
            let reg = &out.register;
            let mut coll = LinearForm::zero();
            for recv in &out.receivers {
                coll.add_scaled(reg.p_form(recv.slot).unwrap(), 1.0);
            }
            coll.add_scaled(&out.payload_form(Quadrature::P).unwrap(), -1.0);
            let expected = (n as f64 + 1.0) * (-2.0 * r).exp() + 2.0 * (1.0 - eta) / eta;
            assert_abs_diff_eq!(reg.variance_of(&coll).unwrap(), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(ccaecc_pq(1, 1.0, 1.0).is_err());
        assert!(ccaecc_pq(3, -1.0, 1.0).is_err());
        assert!(ccaecc_pq(3, 1.0, 0.0).is_err());
        assert!(ccaecc_pq(3, 1.0, 1.2).is_err());
    }

    #[test]
    fn receivers_are_labeled_in_party_order() {
        let out = ccaecc_pq(4, 1.0, 1.0).unwrap();
        let labels: Vec<&str> = out.receivers.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["A", "B", "C", "D"]);
        assert_eq!(out.sender_slot(), 2);
    }

    #[test]
    fn pruning_threshold_does_not_move_the_epsilons() {
        use crate::gaussian::{covariance_of_forms, GaussianState};
        let program = ccaecc_program(3, 1.0, 0.9, ChannelKind::Pq).unwrap();
        let pruned = program.run_symbolic().unwrap();
        let mut unpruned = QuadratureRegister::new(
            program.n_input_modes,
            &program.vacuum_x_factors,
        )
        .unwrap()
        .with_prune_threshold(0.0);
        program.run_symbolic_on(&mut unpruned).unwrap();

        let input = GaussianState::coherent(0.0, 0.0);
        let eps = |reg: &QuadratureRegister| -> Vec<f64> {
            let x_a = reg.input_form(0, Quadrature::X).unwrap();
            let p_a = reg.input_form(0, Quadrature::P).unwrap();
            let mut forms = Vec::new();
            for slot in [3, 4] {
                forms.push(reg.x_form(slot).unwrap() - reg.x_form(2).unwrap());
                forms.push(reg.x_form(slot).unwrap() - &x_a);
            }
            let mut coll = reg.p_form(2).unwrap().clone();
            coll.add_scaled(reg.p_form(3).unwrap(), 1.0);
            coll.add_scaled(reg.p_form(4).unwrap(), 1.0);
            coll.add_scaled(&p_a, -1.0);
            forms.push(coll);
            let m = covariance_of_forms(reg, &forms, &input).unwrap();
            (0..forms.len()).map(|i| m.variance(i)).collect()
        };
        for (a, b) in eps(&pruned).iter().zip(eps(&unpruned)) {
            assert!((a - b).abs() < 1e-10, "pruned {a} vs unpruned {b}");
        }
    }
}
