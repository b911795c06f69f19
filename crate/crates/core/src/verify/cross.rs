//! Three-way agreement: symbolic ε vs covariance-bridge ε vs Monte-Carlo.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::covariance_of_forms;
use crate::protocols::{ChannelKind, ChannelOutput};
use crate::verify::epsilon::noise_forms;
use crate::verify::montecarlo::{mc_epsilons, reference_input_state, McEpsilons};

/// Tolerance for symbolic-vs-bridge ε agreement.
pub const BRIDGE_TOL: f64 = 1e-9;

/// Agreement report across the three ε routes. `symbolic` and `bridge`
/// list ε₁…εₙ (per-receiver sender-referenced, then collective); a NaN in
/// `symbolic` means the noise form was not input-free, which is itself a
/// channel defect and is recorded in `issues`.
#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport {
    pub kind: ChannelKind,
    pub receivers: Vec<String>,
    pub symbolic: Vec<f64>,
    pub bridge: Vec<f64>,
    pub monte_carlo: McEpsilons,
    pub bridge_tolerance: f64,
    pub agree: bool,
    pub issues: Vec<String>,
}

/// Cross-validate one channel output: exact per-label variances, the
/// covariance-bridge route, and `trials` seeded Monte-Carlo runs.
pub fn cross_validate(output: &ChannelOutput, trials: usize, seed: u64) -> Result<AgreementReport> {
    if trials < 1000 {
        return Err(Error::invalid(format!(
            "cross-validation needs at least 10³ trials, got {trials}"
        )));
    }
    let reg = &output.register;
    let forms = noise_forms(output)?;
    let mut all_forms = forms.sender_referenced.clone();
    all_forms.push(forms.collective.clone());

    let mut issues = Vec::new();
    let labels: Vec<String> = output
        .non_sender_receivers()
        .iter()
        .map(|r| format!("ε({})", r.label))
        .chain(std::iter::once("ε(collective)".to_string()))
        .collect();

    let symbolic: Vec<f64> = all_forms
        .iter()
        .zip(&labels)
        .map(|(f, name)| match reg.variance_of(f) {
            Ok(v) => v,
            Err(e) => {
                issues.push(format!("{name}: {e}"));
                f64::NAN
            }
        })
        .collect();

    let input = reference_input_state(output.program.n_input_modes);
    let moments = covariance_of_forms(reg, &all_forms, &input)?;
    let bridge: Vec<f64> = (0..all_forms.len()).map(|i| moments.variance(i)).collect();

    for ((s, b), name) in symbolic.iter().zip(&bridge).zip(&labels) {
        if s.is_finite() && (s - b).abs() > BRIDGE_TOL {
            issues.push(format!("{name}: symbolic {s} vs bridge {b} beyond {BRIDGE_TOL}"));
        }
    }

    let monte_carlo = mc_epsilons(output, trials, seed)?;
    let mc_values: Vec<_> = monte_carlo
        .per_receiver
        .iter()
        .chain(std::iter::once(&monte_carlo.collective))
        .copied()
        .collect();
    for ((est, s), name) in mc_values.iter().zip(&symbolic).zip(&labels) {
        if s.is_finite() && !est.within(*s, 3.0) {
            issues.push(format!(
                "{name}: Monte-Carlo {} ± {} vs exact {s} beyond 3σ",
                est.value, est.std_error
            ));
        }
    }
    for (mean, name) in monte_carlo.noise_means.iter().zip(&labels) {
        if !mean.within(0.0, 3.0) {
            issues.push(format!(
                "{name}: noise mean {} ± {} not consistent with 0",
                mean.value, mean.std_error
            ));
        }
    }

    let agree = issues.is_empty();
    Ok(AgreementReport {
        kind: output.kind,
        receivers: output.receivers.iter().map(|r| r.label.clone()).collect(),
        symbolic,
        bridge,
        monte_carlo,
        bridge_tolerance: BRIDGE_TOL,
        agree,
        issues,
    })
}
