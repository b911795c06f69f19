//! Bridge between the symbolic and numeric engines.
//!
//! A register's linear forms, the squeezing assignment of its basis, and
//! the covariance of the (symbolic) input modes together determine the
//! exact second moments of any collection of forms:
//! `Cov(f, g) = fᵀ·Σ_basis·g`. This gives a covariance route to every ε
//! the symbolic engine computes per-label, and it turns a register plus an
//! input state into a full Gaussian output state.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::heisenberg::{BasisLabel, LabelKind, LinearForm, Quadrature, QuadratureRegister};

/// First and second moments of a set of forms.
#[derive(Debug, Clone)]
pub struct FormMoments {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl FormMoments {
    pub fn variance(&self, i: usize) -> f64 {
        self.cov[(i, i)]
    }
}

/// Exact moments of arbitrary linear forms over the register's basis, with
/// input-mode statistics taken from `input`.
pub fn covariance_of_forms(
    register: &QuadratureRegister,
    forms: &[LinearForm],
    input: &GaussianState,
) -> Result<FormMoments> {
    if input.n_modes() != register.n_input_modes() {
        return Err(Error::invalid(format!(
            "input state has {} modes but the register has {} input modes",
            input.n_modes(),
            register.n_input_modes()
        )));
    }

    // basis layout: input quadratures first (interleaved), then every
    // assigned or referenced non-input label
    let n_in = register.n_input_modes();
    let mut index: HashMap<BasisLabel, usize> = HashMap::new();
    for m in 0..n_in {
        index.insert(BasisLabel::input(m as u32, Quadrature::X), 2 * m);
        index.insert(BasisLabel::input(m as u32, Quadrature::P), 2 * m + 1);
    }
    let mut others: Vec<BasisLabel> = register.assigned_labels();
    for form in forms {
        for (label, _) in form.iter() {
            if label.kind != LabelKind::Input && register.variance_factor(label).is_none() {
                others.push(*label);
            }
        }
    }
    others.sort();
    others.dedup();
    for label in &others {
        let next = index.len();
        index.insert(*label, next);
    }
    let dim = index.len();

    let mut sigma = DMatrix::zeros(dim, dim);
    sigma.view_mut((0, 0), (2 * n_in, 2 * n_in)).copy_from(input.cov());
    let mut basis_mean = DVector::zeros(dim);
    basis_mean.rows_mut(0, 2 * n_in).copy_from(input.mean());
    for label in &others {
        let i = index[label];
        let factor = register.variance_factor(label).unwrap_or(1.0);
        sigma[(i, i)] = factor * register.vacuum_variance();
    }

    // coefficient matrix: one row per form
    let mut coeff = DMatrix::zeros(forms.len(), dim);
    for (row, form) in forms.iter().enumerate() {
        for (label, c) in form.iter() {
            coeff[(row, index[label])] = *c;
        }
    }

    let mean = &coeff * basis_mean;
    let cov = &coeff * sigma * coeff.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    Ok(FormMoments { mean, cov })
}

/// Assemble the Gaussian state of the register's live modes for a given
/// input state. Output mode `k` corresponds to `register.live_indices()[k]`.
pub fn from_heisenberg(
    register: &QuadratureRegister,
    input: &GaussianState,
) -> Result<GaussianState> {
    let mut forms = Vec::new();
    for slot in register.live_indices() {
        let pair = register.mode(slot)?;
        forms.push(pair.x.clone());
        forms.push(pair.p.clone());
    }
    let moments = covariance_of_forms(register, &forms, input)?;
    GaussianState::from_moments(moments.mean, moments.cov, register.vacuum_variance())
}
