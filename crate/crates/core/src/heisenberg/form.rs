//! Basis labels and linear forms over quadrature operators.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// One of the two canonical quadratures of a bosonic mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    /// The conjugate quadrature.
    pub fn conjugate(self) -> Self {
        match self {
            Quadrature::X => Quadrature::P,
            Quadrature::P => Quadrature::X,
        }
    }
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quadrature::X => write!(f, "x"),
            Quadrature::P => write!(f, "p"),
        }
    }
}

/// Which family a basis operator belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LabelKind {
    /// Quadrature of a symbolic input mode. Never carries a variance.
    Input,
    /// Quadrature of a (possibly squeezed) vacuum ancilla.
    Vacuum,
    /// Fresh vacuum quadrature injected by an inefficient homodyne detector.
    DetectorVacuum,
}

/// A single basis operator, e.g. `x̂₂⁽⁰⁾` of an ancilla mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel {
    pub kind: LabelKind,
    pub mode: u32,
    pub quadrature: Quadrature,
}

impl BasisLabel {
    pub fn input(mode: u32, quadrature: Quadrature) -> Self {
        BasisLabel { kind: LabelKind::Input, mode, quadrature }
    }

    pub fn vacuum(mode: u32, quadrature: Quadrature) -> Self {
        BasisLabel { kind: LabelKind::Vacuum, mode, quadrature }
    }

    pub fn detector(mode: u32, quadrature: Quadrature) -> Self {
        BasisLabel { kind: LabelKind::DetectorVacuum, mode, quadrature }
    }

    /// The label of the conjugate quadrature on the same basis mode.
    pub fn conjugate(self) -> Self {
        BasisLabel { quadrature: self.quadrature.conjugate(), ..self }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            LabelKind::Input => "in",
            LabelKind::Vacuum => "vac",
            LabelKind::DetectorVacuum => "det",
        };
        write!(f, "{}_{}[{}]", self.quadrature, self.mode, tag)
    }
}

/// A real linear combination of basis operators.
///
/// Addition and scalar multiplication act exactly on the coefficient map;
/// coefficients whose magnitude falls below [`crate::PRUNE_THRESHOLD`]
/// after an arithmetic step are dropped (the explicit `_with_threshold`
/// variants override this, 0 disabling pruning entirely).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearForm {
    coefficients: HashMap<BasisLabel, f64>,
}

impl LinearForm {
    pub fn zero() -> Self {
        LinearForm::default()
    }

    /// The form consisting of a single basis operator.
    pub fn basis(label: BasisLabel) -> Self {
        let mut coefficients = HashMap::new();
        coefficients.insert(label, 1.0);
        LinearForm { coefficients }
    }

    pub fn coefficient(&self, label: &BasisLabel) -> f64 {
        self.coefficients.get(label).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Iterate over the (label, coefficient) pairs in unspecified order.
    pub fn iter(&self) -> impl Iterator<Item = (&BasisLabel, &f64)> {
        self.coefficients.iter()
    }

    /// The labels sorted canonically; useful for deterministic output.
    pub fn sorted_terms(&self) -> Vec<(BasisLabel, f64)> {
        let mut terms: Vec<_> = self.coefficients.iter().map(|(l, c)| (*l, *c)).collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        terms
    }

    /// `self += scale * other`. The addition itself is exact; afterwards
    /// coefficients with magnitude below the crate pruning threshold are
    /// dropped, which removes the ~1 ulp residues left by cancellations
    /// like `√2·(1/√2) − 1`.
    pub fn add_scaled(&mut self, other: &LinearForm, scale: f64) {
        self.add_scaled_with_threshold(other, scale, crate::PRUNE_THRESHOLD);
    }

    /// [`add_scaled`](Self::add_scaled) with an explicit pruning threshold
    /// (0 keeps every nonzero coefficient).
    pub fn add_scaled_with_threshold(&mut self, other: &LinearForm, scale: f64, threshold: f64) {
        for (label, c) in &other.coefficients {
            let entry = self.coefficients.entry(*label).or_insert(0.0);
            *entry += scale * c;
        }
        self.coefficients.retain(|_, c| *c != 0.0 && c.abs() >= threshold);
    }

    pub fn scaled(&self, scale: f64) -> LinearForm {
        let mut out = LinearForm::zero();
        out.add_scaled(self, scale);
        out
    }

    pub fn scaled_with_threshold(&self, scale: f64, threshold: f64) -> LinearForm {
        let mut out = LinearForm::zero();
        out.add_scaled_with_threshold(self, scale, threshold);
        out
    }

    /// Drop coefficients with magnitude below `threshold`.
    pub fn prune(&mut self, threshold: f64) {
        if threshold > 0.0 {
            self.coefficients.retain(|_, c| c.abs() >= threshold);
        }
    }

    /// True when no input-quadrature label remains.
    pub fn is_input_free(&self) -> bool {
        !self.coefficients.keys().any(|l| l.kind == LabelKind::Input)
    }

    /// The input-label terms of the form (empty when input-free).
    pub fn input_terms(&self) -> Vec<(BasisLabel, f64)> {
        let mut terms: Vec<_> = self
            .coefficients
            .iter()
            .filter(|(l, _)| l.kind == LabelKind::Input)
            .map(|(l, c)| (*l, *c))
            .collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        terms
    }

    /// Apply a relabeling to every basis label. Panics if the map collides.
    pub fn relabeled(&self, map: impl Fn(BasisLabel) -> BasisLabel) -> LinearForm {
        let mut coefficients = HashMap::with_capacity(self.coefficients.len());
        for (label, c) in &self.coefficients {
            let prev = coefficients.insert(map(*label), *c);
            assert!(prev.is_none(), "relabeling collided");
        }
        LinearForm { coefficients }
    }

    /// Max-norm distance between two forms over the union of their labels.
    pub fn max_coefficient_distance(&self, other: &LinearForm) -> f64 {
        let mut max = 0.0_f64;
        for (label, c) in &self.coefficients {
            max = max.max((c - other.coefficient(label)).abs());
        }
        for (label, c) in &other.coefficients {
            if !self.coefficients.contains_key(label) {
                max = max.max(c.abs());
            }
        }
        max
    }
}

/// The canonical antisymmetric bilinear form on the basis:
/// `Ω(x_m, p_m) = 1` for every basis mode `m`, zero otherwise, extended
/// bilinearly. `Ω(f, g) = 1` means `[f̂, ĝ] = i` in the adopted units.
pub fn symplectic_product(f: &LinearForm, g: &LinearForm) -> f64 {
    let mut sum = 0.0;
    for (label, c) in f.iter() {
        let partner = label.conjugate();
        let d = g.coefficient(&partner);
        if d != 0.0 {
            match label.quadrature {
                Quadrature::X => sum += c * d,
                Quadrature::P => sum -= c * d,
            }
        }
    }
    sum
}

impl Add for &LinearForm {
    type Output = LinearForm;
    fn add(self, rhs: &LinearForm) -> LinearForm {
        let mut out = self.clone();
        out.add_scaled(rhs, 1.0);
        out
    }
}

impl Sub for &LinearForm {
    type Output = LinearForm;
    fn sub(self, rhs: &LinearForm) -> LinearForm {
        let mut out = self.clone();
        out.add_scaled(rhs, -1.0);
        out
    }
}

impl Mul<f64> for &LinearForm {
    type Output = LinearForm;
    fn mul(self, rhs: f64) -> LinearForm {
        self.scaled(rhs)
    }
}

impl Neg for &LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        self.scaled(-1.0)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (label, c)) in self.sorted_terms().into_iter().enumerate() {
            if i == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else if c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            if (mag - 1.0).abs() > 1e-12 {
                write!(f, "{mag}·")?;
            }
            write!(f, "{label}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xin(mode: u32) -> BasisLabel {
        BasisLabel::input(mode, Quadrature::X)
    }

    fn pin(mode: u32) -> BasisLabel {
        BasisLabel::input(mode, Quadrature::P)
    }

    #[test]
    fn arithmetic_is_exact_on_the_coefficient_map() {
        let a = LinearForm::basis(xin(0));
        let b = LinearForm::basis(xin(1));
        let mut f = &(&a + &b) * 0.25;
        f.add_scaled(&a, 0.75);
        assert_eq!(f.coefficient(&xin(0)), 1.0);
        assert_eq!(f.coefficient(&xin(1)), 0.25);

        // exact cancellation removes the entry entirely
        let g = &f - &f;
        assert!(g.is_zero());
    }

    #[test]
    fn prune_drops_only_small_coefficients() {
        let mut f = LinearForm::basis(xin(0));
        f.add_scaled(&LinearForm::basis(xin(1)), 1e-13);
        f.prune(1e-12);
        assert_eq!(f.len(), 1);
        assert_eq!(f.coefficient(&xin(0)), 1.0);
    }

    #[test]
    fn symplectic_product_is_canonical_on_the_basis() {
        let x0 = LinearForm::basis(xin(0));
        let p0 = LinearForm::basis(pin(0));
        let p1 = LinearForm::basis(pin(1));
        assert_eq!(symplectic_product(&x0, &p0), 1.0);
        assert_eq!(symplectic_product(&p0, &x0), -1.0);
        assert_eq!(symplectic_product(&x0, &p1), 0.0);
        // input and vacuum labels with the same mode id are distinct modes
        let pv0 = LinearForm::basis(BasisLabel::vacuum(0, Quadrature::P));
        assert_eq!(symplectic_product(&x0, &pv0), 0.0);
    }

    #[test]
    fn input_terms_are_detected() {
        let mut f = LinearForm::basis(BasisLabel::vacuum(3, Quadrature::X));
        assert!(f.is_input_free());
        f.add_scaled(&LinearForm::basis(xin(0)), -2.0);
        assert!(!f.is_input_free());
        assert_eq!(f.input_terms(), vec![(xin(0), -2.0)]);
    }

    #[test]
    fn display_is_sorted_and_signed() {
        let mut f = LinearForm::basis(xin(1));
        f.add_scaled(&LinearForm::basis(xin(0)), -1.0);
        f.add_scaled(&LinearForm::basis(pin(0)), 0.5);
        assert_eq!(format!("{f}"), "-x_0[in] + 0.5·p_0[in] + x_1[in]");
    }
}
