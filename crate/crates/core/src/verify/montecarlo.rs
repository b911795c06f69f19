//! Monte-Carlo ε estimation by re-running a channel program with
//! stochastic homodyne outcomes.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::protocols::ChannelOutput;

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

impl McEstimate {
    /// |value − reference| within `k` standard errors (with a small
    /// absolute floor for exactly-pinned quantities).
    pub fn within(&self, reference: f64, k: f64) -> bool {
        (self.value - reference).abs() <= k * self.std_error + 1e-9
    }
}

/// Monte-Carlo ε estimates for one channel output.
#[derive(Debug, Clone, Serialize)]
pub struct McEpsilons {
    pub receivers: Vec<String>,
    /// Sender-output-referenced per-receiver noise variances.
    pub per_receiver: Vec<McEstimate>,
    /// Collective conjugate noise, in excess of the payload's shot noise.
    pub collective: McEstimate,
    /// Sample means of the same noise quantities; all must vanish.
    pub noise_means: Vec<McEstimate>,
    pub trials: usize,
    pub seed: u64,
    /// Coherent input means used for the payload modes.
    pub input_means: Vec<(f64, f64)>,
}

/// Deterministic, non-trivial coherent input means: distinct per input
/// mode so cross-talk and gain errors show up in the mean checks.
pub(crate) fn reference_input_means(n_input: usize) -> Vec<(f64, f64)> {
    (0..n_input).map(|m| (0.8 + 0.2 * m as f64, -0.5 + 0.3 * m as f64)).collect()
}

pub(crate) fn reference_input_state(n_input: usize) -> GaussianState {
    let mut state = GaussianState::vacuum_with_variance(0, crate::VACUUM_VARIANCE);
    for (x0, p0) in reference_input_means(n_input) {
        state = state.tensor(&GaussianState::coherent(x0, p0));
    }
    state
}

/// Estimate the channel's ε values over `trials` seeded runs.
///
/// Each trial executes the program with fresh homodyne outcomes (stream
/// `t` of the seeded ChaCha generator, so trials are independent and the
/// whole estimate is reproducible), then draws one joint sample of the
/// output quadratures. Receiver-to-sender differences estimate the
/// per-receiver ε directly; the collective conjugate sum estimates
/// `σ²_vac + εₙ` because the payload quadrature rides along with unit
/// coefficient, so its shot noise is subtracted.
pub fn mc_epsilons(output: &ChannelOutput, trials: usize, seed: u64) -> Result<McEpsilons> {
    if trials < 2 {
        return Err(Error::invalid(format!("need at least 2 trials, got {trials}")));
    }
    let program = &output.program;
    let input = reference_input_state(program.n_input_modes);
    let input_means = reference_input_means(program.n_input_modes);
    let copied = output.kind.copied();
    let conjugate = output.kind.conjugate();
    let payload_conj_mean = {
        let (x0, p0) = input_means[output.payload_input];
        match conjugate {
            crate::Quadrature::X => x0,
            crate::Quadrature::P => p0,
        }
    };
    let n_diff = output.non_sender_receivers().len();

    let rows: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let run = program.run_gaussian(&input, &mut rng).expect("program replay");
            let sample = run.state.sample(&mut rng);
            let value = |slot: usize, q: crate::Quadrature| {
                let pos = run.position(slot).expect("live output mode");
                sample[run.state.index(pos, q)]
            };
            let sender = value(output.sender_slot(), copied);
            let mut row = Vec::with_capacity(n_diff + 1);
            for recv in output.non_sender_receivers() {
                row.push(value(recv.slot, copied) - sender);
            }
            let mut coll = 0.0;
            for recv in &output.receivers {
                coll += value(recv.slot, conjugate);
            }
            row.push(coll - payload_conj_mean);
            row
        })
        .collect();

    let n = trials as f64;
    let column_stats = |col: usize| {
        let mut sum = 0.0;
        for row in &rows {
            sum += row[col];
        }
        let mean = sum / n;
        let mut ss = 0.0;
        for row in &rows {
            ss += (row[col] - mean).powi(2);
        }
        let var = ss / (n - 1.0);
        (mean, var)
    };

    let var_rel_error = (2.0 / (n - 1.0)).sqrt();
    let mut per_receiver = Vec::with_capacity(n_diff);
    let mut noise_means = Vec::with_capacity(n_diff + 1);
    for col in 0..n_diff {
        let (mean, var) = column_stats(col);
        per_receiver.push(McEstimate { value: var, std_error: var * var_rel_error });
        noise_means.push(McEstimate { value: mean, std_error: (var / n).sqrt() });
    }
    let (mean, var) = column_stats(n_diff);
    let sigma2 = program.vacuum_variance;
    let collective = McEstimate { value: var - sigma2, std_error: var * var_rel_error };
    noise_means.push(McEstimate { value: mean, std_error: (var / n).sqrt() });

    Ok(McEpsilons {
        receivers: output.non_sender_receivers().iter().map(|r| r.label.clone()).collect(),
        per_receiver,
        collective,
        noise_means,
        trials,
        seed,
        input_means,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::ccaecc_pq;

    #[test]
    fn estimates_are_reproducible_for_a_fixed_seed() {
        let out = ccaecc_pq(2, 0.5, 1.0).unwrap();
        let a = mc_epsilons(&out, 500, 77).unwrap();
        let b = mc_epsilons(&out, 500, 77).unwrap();
        assert_eq!(a.per_receiver[0].value.to_bits(), b.per_receiver[0].value.to_bits());
        assert_eq!(a.collective.value.to_bits(), b.collective.value.to_bits());
        let c = mc_epsilons(&out, 500, 78).unwrap();
        assert_ne!(a.collective.value.to_bits(), c.collective.value.to_bits());
    }

    #[test]
    fn estimates_track_the_exact_values() {
        let (r, eta) = (0.6, 0.85);
        let out = ccaecc_pq(3, r, eta).unwrap();
        let mc = mc_epsilons(&out, 20_000, 5).unwrap();
        let e2 = (-2.0 * r).exp();
        assert!(mc.per_receiver[0].within(2.0 * e2, 3.0));
        assert!(mc.per_receiver[1].within(2.0 * e2, 3.0));
        assert!(mc.collective.within(4.0 * e2 + 2.0 * (1.0 - eta) / eta, 3.0));
        for m in &mc.noise_means {
            assert!(m.within(0.0, 3.0), "noise mean {} ± {}", m.value, m.std_error);
        }
    }
}
