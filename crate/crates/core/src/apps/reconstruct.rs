//! Shared reconstruction primitive for teleportation and secret sharing.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{covariance_of_forms, GaussianState};
use crate::heisenberg::Quadrature;
use crate::protocols::{ChannelOutput, FeedForwardTarget, Receiver, Step};
use crate::verify::McEstimate;

/// Monte-Carlo counterpart of the exact reconstruction variances.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionMc {
    pub v_copied: McEstimate,
    pub v_conjugate: McEstimate,
    pub trials: usize,
    pub seed: u64,
}

/// Exact and sampled excess variances of a reconstruction.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub withheld: Vec<String>,
    /// `Var + bias²` of the copied-quadrature error `q̂_recv − q̂_payload`.
    pub v_copied: f64,
    /// Same for the reconstructed conjugate quadrature.
    pub v_conjugate: f64,
    pub mc: Option<ReconstructionMc>,
}

/// Run the reconstruction: every output party except the receiver that
/// appears in `cooperating` measures the conjugate quadrature of its mode
/// (efficiency `eta_controllers`) and the receiver displaces by the sum of
/// the outcomes.
///
/// `input_means` assigns a coherent mean to every symbolic input mode of
/// the channel program; the payload entry is the state being teleported
/// (or the encoded secret). `mc` requests a Monte-Carlo pass.
pub fn reconstruct(
    channel: &ChannelOutput,
    receiver_label: &str,
    cooperating: &[String],
    eta_controllers: f64,
    input_means: &[(f64, f64)],
    mc: Option<(usize, u64)>,
) -> Result<Reconstruction> {
    if !(eta_controllers > 0.0 && eta_controllers <= 1.0) {
        return Err(Error::invalid(format!(
            "controller homodyne efficiency {eta_controllers} outside (0, 1]"
        )));
    }
    if input_means.len() != channel.program.n_input_modes {
        return Err(Error::invalid(format!(
            "{} input means given for {} input modes",
            input_means.len(),
            channel.program.n_input_modes
        )));
    }
    let receiver = channel
        .receiver(receiver_label)
        .ok_or_else(|| {
            Error::invalid(format!("receiver {receiver_label:?} is not part of this channel"))
        })?
        .clone();
    let controllers: Vec<&Receiver> =
        channel.receivers.iter().filter(|r| r.label != receiver.label).collect();
    for label in cooperating {
        if label == &receiver.label {
            return Err(Error::invalid(format!(
                "receiver {label:?} cannot be among its own controllers"
            )));
        }
        if !controllers.iter().any(|c| &c.label == label) {
            return Err(Error::invalid(format!("{label:?} is not a controller of this channel")));
        }
    }

    let conjugate = channel.kind.conjugate();
    let copied = channel.kind.copied();
    let mut program = channel.program.clone();
    let mut withheld = Vec::new();
    for c in &controllers {
        if cooperating.contains(&c.label) {
            program.push(Step::HomodyneFeedForward {
                mode: c.slot,
                quadrature: conjugate,
                targets: vec![FeedForwardTarget {
                    mode: receiver.slot,
                    quadrature: conjugate,
                    gain: 1.0,
                }],
                eta: eta_controllers,
            });
        } else {
            withheld.push(c.label.clone());
        }
    }

    let reg = program.run_symbolic()?;
    let payload_copied = channel.payload_form(copied)?;
    let payload_conj = channel.payload_form(conjugate)?;
    let e_copied = reg.mode(receiver.slot)?.form(copied) - &payload_copied;
    let e_conj = reg.mode(receiver.slot)?.form(conjugate) - &payload_conj;

    let mut input = GaussianState::vacuum_with_variance(0, program.vacuum_variance);
    for (x0, p0) in input_means {
        input = input.tensor(&GaussianState::coherent(*x0, *p0));
    }
    let moments = covariance_of_forms(&reg, &[e_copied.clone(), e_conj.clone()], &input)?;
    let v_copied = moments.variance(0) + moments.mean[0].powi(2);
    let v_conjugate = moments.variance(1) + moments.mean[1].powi(2);

    let mc = match mc {
        None => None,
        Some((trials, seed)) => {
            if trials < 2 {
                return Err(Error::invalid(format!("need at least 2 trials, got {trials}")));
            }
            // payload coefficients inside the error forms fix the shot-noise
            // correction that maps sampled squared errors onto the exact
            // operator-difference variances
            let sigma2 = program.vacuum_variance;
            let coef = |form: &crate::heisenberg::LinearForm, q: Quadrature| {
                1.0 + form.coefficient(&crate::heisenberg::BasisLabel {
                    kind: crate::heisenberg::LabelKind::Input,
                    mode: channel.payload_input as u32,
                    quadrature: q,
                })
            };
            let c_copied = coef(&e_copied, copied);
            let c_conj = coef(&e_conj, conjugate);
            let (x0, p0) = input_means[channel.payload_input];
            let target = |q: Quadrature| match q {
                Quadrature::X => x0,
                Quadrature::P => p0,
            };
            let samples: Vec<(f64, f64)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha12Rng::seed_from_u64(seed);
                    rng.set_stream(t as u64);
                    let run = program.run_gaussian(&input, &mut rng).expect("program replay");
                    let sample = run.state.sample(&mut rng);
                    let pos = run.position(receiver.slot).expect("receiver mode live");
                    let qc = sample[run.state.index(pos, copied)] - target(copied);
                    let qj = sample[run.state.index(pos, conjugate)] - target(conjugate);
                    (qc * qc, qj * qj)
                })
                .collect();
            let n = trials as f64;
            let stat = |pick: fn(&(f64, f64)) -> f64, c: f64| {
                let mean = samples.iter().map(pick).sum::<f64>() / n;
                let ss =
                    samples.iter().map(|s| (pick(s) - mean).powi(2)).sum::<f64>() / (n - 1.0);
                McEstimate { value: mean - (2.0 * c - 1.0) * sigma2, std_error: (ss / n).sqrt() }
            };
            Some(ReconstructionMc {
                v_copied: stat(|s| s.0, c_copied),
                v_conjugate: stat(|s| s.1, c_conj),
                trials,
                seed,
            })
        }
    };

    Ok(Reconstruction { withheld, v_copied, v_conjugate, mc })
}

/// Coherent-state overlap fidelity for excess noise `(v_x, v_p)` in units
/// where the vacuum variance is `sigma2`.
pub fn gaussian_fidelity(v_x: f64, v_p: f64, sigma2: f64) -> f64 {
    2.0 * sigma2 / ((2.0 * sigma2 + v_x) * (2.0 * sigma2 + v_p)).sqrt()
}
