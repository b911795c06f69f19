//! Quantum secret sharing of classical continuous values.
//!
//! The sender encodes the secret `(x₀, p₀)` as the coherent displacement
//! of the channel input. The copied quadrature reaches every receiver
//! directly; the conjugate can only be reconstructed when the coalition of
//! cooperating parties reveals its homodyne outcomes. A missing party
//! leaves an antisqueezed term in the estimate, so secrecy grows with the
//! squeezing strength.

use serde::Serialize;

use crate::apps::reconstruct::{reconstruct, ReconstructionMc};
use crate::error::{Error, Result};
use crate::heisenberg::Quadrature;
use crate::protocols::ChannelOutput;

#[derive(Debug, Clone)]
pub struct QssOptions {
    /// Homodyne efficiency of the coalition; defaults to the channel's η.
    pub eta_controllers: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for QssOptions {
    fn default() -> Self {
        QssOptions { eta_controllers: None, trials: 10_000, seed: 0 }
    }
}

/// Per-quadrature reconstruction error variances (in excess of the
/// unavoidable coherent shot noise), exact and Monte-Carlo.
#[derive(Debug, Clone, Serialize)]
pub struct QssReport {
    pub reconstructor: String,
    pub coalition: Vec<String>,
    pub missing: Vec<String>,
    pub secret: (f64, f64),
    /// Error variance of the copied-quadrature estimate.
    pub v_x: f64,
    /// Error variance of the conjugate estimate after the coalition's
    /// feed-forward.
    pub v_p: f64,
    pub full_coalition: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<ReconstructionMc>,
}

/// Reconstruct a classical secret at `reconstructor` with the help of
/// `coalition`. The report's `v_x`/`v_p` refer to the channel's copied and
/// conjugate quadratures respectively.
pub fn qss_classical(
    channel: &ChannelOutput,
    secret: (f64, f64),
    reconstructor: &str,
    coalition: &[String],
    options: &QssOptions,
) -> Result<QssReport> {
    if coalition.iter().any(|c| c == reconstructor) {
        return Err(Error::invalid(format!(
            "reconstructor {reconstructor:?} cannot be inside the coalition"
        )));
    }
    for label in coalition {
        if channel.receiver(label).is_none() {
            return Err(Error::invalid(format!("{label:?} is not a receiver of this channel")));
        }
    }
    let eta = options.eta_controllers.unwrap_or(channel.meta.eta);
    let mut input_means = vec![(0.0, 0.0); channel.program.n_input_modes];
    input_means[channel.payload_input] = secret;
    let mc = if options.trials > 0 { Some((options.trials, options.seed)) } else { None };

    let rec = reconstruct(channel, reconstructor, coalition, eta, &input_means, mc)?;
    let full_coalition = rec.withheld.is_empty();
    let (v_x, v_p) = match channel.kind.copied() {
        Quadrature::X => (rec.v_copied, rec.v_conjugate),
        Quadrature::P => (rec.v_conjugate, rec.v_copied),
    };
    Ok(QssReport {
        reconstructor: reconstructor.to_string(),
        coalition: coalition.to_vec(),
        missing: rec.withheld,
        secret,
        v_x,
        v_p,
        full_coalition,
        monte_carlo: rec.mc,
    })
}
