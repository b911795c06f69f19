//! Quadrature registers: ordered collections of modes with exact linear
//! forms, squeezing assignments, and the gate/measurement operations.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heisenberg::form::{symplectic_product, BasisLabel, LinearForm, Quadrature};
use crate::{PRUNE_THRESHOLD, SYMPLECTIC_TOL, VACUUM_VARIANCE};

/// The canonical pair of forms describing one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePair {
    pub x: LinearForm,
    pub p: LinearForm,
}

impl ModePair {
    pub fn form(&self, q: Quadrature) -> &LinearForm {
        match q {
            Quadrature::X => &self.x,
            Quadrature::P => &self.p,
        }
    }
}

/// One entry of a symplectic check: the value of `Ω` between two canonical
/// forms and the value it must take.
#[derive(Debug, Clone, Serialize)]
pub struct SymplecticEntry {
    pub modes: (usize, usize),
    pub forms: (Quadrature, Quadrature),
    pub value: f64,
    pub expected: f64,
}

/// Full report of the canonical commutation structure of a register.
#[derive(Debug, Clone, Serialize)]
pub struct SymplecticCheck {
    pub entries: Vec<SymplecticEntry>,
    pub violations: Vec<SymplecticEntry>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// An ordered set of modes, each an (x, p) pair of linear forms, plus the
/// variance assignment of every non-input basis operator.
///
/// Measured modes leave a tombstone so that mode indices stay stable over
/// the lifetime of a protocol; addressing a tombstone is a stale-mode error.
#[derive(Debug, Clone)]
pub struct QuadratureRegister {
    modes: Vec<Option<ModePair>>,
    /// Variance of each non-input basis label, in units of `vacuum_variance`.
    variances: HashMap<BasisLabel, f64>,
    n_input_modes: usize,
    vacuum_variance: f64,
    prune_threshold: f64,
    detector_count: u32,
}

impl QuadratureRegister {
    /// Build a register of `n_input_modes` symbolic input modes followed by
    /// one vacuum mode per entry of `vacuum_x_factors`.
    ///
    /// Each factor `s` scales the x-quadrature amplitude of its vacuum mode:
    /// `Var(x) = s²·σ²_vac` and `Var(p) = σ²_vac/s²`, so `s = e^{+r}` is an
    /// x-antisqueezed mode, `s = e^{-r}` an x-squeezed one and `s = 1` plain
    /// vacuum. Every mode starts with identity forms on its own labels.
    pub fn new(n_input_modes: usize, vacuum_x_factors: &[f64]) -> Result<Self> {
        for (i, s) in vacuum_x_factors.iter().enumerate() {
            if !(*s > 0.0) || !s.is_finite() {
                return Err(Error::invalid(format!(
                    "vacuum mode {i}: squeezing factor must be positive and finite, got {s}"
                )));
            }
        }
        let mut modes = Vec::with_capacity(n_input_modes + vacuum_x_factors.len());
        let mut variances = HashMap::new();
        for m in 0..n_input_modes {
            modes.push(Some(ModePair {
                x: LinearForm::basis(BasisLabel::input(m as u32, Quadrature::X)),
                p: LinearForm::basis(BasisLabel::input(m as u32, Quadrature::P)),
            }));
        }
        for (m, s) in vacuum_x_factors.iter().enumerate() {
            let xl = BasisLabel::vacuum(m as u32, Quadrature::X);
            let pl = BasisLabel::vacuum(m as u32, Quadrature::P);
            variances.insert(xl, s * s);
            variances.insert(pl, 1.0 / (s * s));
            modes.push(Some(ModePair { x: LinearForm::basis(xl), p: LinearForm::basis(pl) }));
        }
        Ok(QuadratureRegister {
            modes,
            variances,
            n_input_modes,
            vacuum_variance: VACUUM_VARIANCE,
            prune_threshold: PRUNE_THRESHOLD,
            detector_count: 0,
        })
    }

    pub fn with_vacuum_variance(mut self, sigma2: f64) -> Self {
        self.vacuum_variance = sigma2;
        self
    }

    /// Set the coefficient-pruning threshold (0 disables pruning).
    pub fn with_prune_threshold(mut self, threshold: f64) -> Self {
        self.prune_threshold = threshold;
        self
    }

    pub fn vacuum_variance(&self) -> f64 {
        self.vacuum_variance
    }

    pub fn n_input_modes(&self) -> usize {
        self.n_input_modes
    }

    /// Total number of mode slots, including tombstones of measured modes.
    pub fn n_slots(&self) -> usize {
        self.modes.len()
    }

    /// Indices of the modes that are still live, in slot order.
    pub fn live_indices(&self) -> Vec<usize> {
        self.modes
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.as_ref().map(|_| i))
            .collect()
    }

    pub fn is_live(&self, mode: usize) -> bool {
        matches!(self.modes.get(mode), Some(Some(_)))
    }

    /// Access the forms of a live mode.
    pub fn mode(&self, index: usize) -> Result<&ModePair> {
        match self.modes.get(index) {
            Some(Some(pair)) => Ok(pair),
            Some(None) => Err(Error::StaleMode(index)),
            None => Err(Error::invalid(format!(
                "mode {index} out of range (register has {} slots)",
                self.modes.len()
            ))),
        }
    }

    pub fn x_form(&self, index: usize) -> Result<&LinearForm> {
        Ok(&self.mode(index)?.x)
    }

    pub fn p_form(&self, index: usize) -> Result<&LinearForm> {
        Ok(&self.mode(index)?.p)
    }

    /// The identity form of an input-mode quadrature, e.g. the original
    /// `x̂_A` against which channel outputs are referenced.
    pub fn input_form(&self, input_mode: usize, q: Quadrature) -> Result<LinearForm> {
        if input_mode >= self.n_input_modes {
            return Err(Error::invalid(format!(
                "input mode {input_mode} out of range ({} input modes)",
                self.n_input_modes
            )));
        }
        Ok(LinearForm::basis(BasisLabel { kind: crate::LabelKind::Input, mode: input_mode as u32, quadrature: q }))
    }

    /// Variance factor (in vacuum units) assigned to a basis label.
    pub fn variance_factor(&self, label: &BasisLabel) -> Option<f64> {
        self.variances.get(label).copied()
    }

    /// All non-input labels with a variance assignment, sorted canonically.
    pub fn assigned_labels(&self) -> Vec<BasisLabel> {
        let mut labels: Vec<BasisLabel> = self.variances.keys().copied().collect();
        labels.sort();
        labels
    }

    /// Effective amplitude of `label` inside the x/p form of `mode`: the
    /// stored coefficient times the squeezing amplitude `s` of the label.
    /// For a GHZ register this reproduces the textbook coefficients in
    /// which the `e^{±r}` factors are written out explicitly.
    pub fn amplitude(&self, mode: usize, q: Quadrature, label: &BasisLabel) -> Result<f64> {
        let c = self.mode(mode)?.form(q).coefficient(label);
        let s = self.variances.get(label).map(|v| v.sqrt()).unwrap_or(1.0);
        Ok(c * s)
    }

    fn check_distinct_live(&self, i: usize, j: usize, what: &str) -> Result<()> {
        if i == j {
            return Err(Error::invalid(format!("{what}: modes must be distinct, got {i} twice")));
        }
        self.mode(i)?;
        self.mode(j)?;
        Ok(())
    }

    fn prune_mode(&mut self, index: usize) {
        let threshold = self.prune_threshold;
        if let Some(Some(pair)) = self.modes.get_mut(index) {
            pair.x.prune(threshold);
            pair.p.prune(threshold);
        }
    }

    fn take_pair(&mut self, index: usize) -> ModePair {
        self.modes[index].take().expect("mode checked live")
    }

    fn put_pair(&mut self, index: usize, pair: ModePair) {
        self.modes[index] = Some(pair);
        self.prune_mode(index);
    }

    /// Beam splitter of transmissivity `t` on modes `(i, j)`:
    ///
    /// ```text
    /// q_i' = √t·q_i − √(1−t)·q_j
    /// q_j' = √(1−t)·q_i + √t·q_j
    /// ```
    ///
    /// At `t = 1/2` mode `i` carries `(q_i − q_j)/√2` and mode `j` carries
    /// `(q_i + q_j)/√2`; at `t = 1` both modes are unchanged.
    pub fn apply_beam_splitter(&mut self, i: usize, j: usize, t: f64) -> Result<()> {
        self.check_distinct_live(i, j, "beam splitter")?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("beam splitter transmissivity {t} outside [0, 1]")));
        }
        let (ct, cr) = (t.sqrt(), (1.0 - t).sqrt());
        let thr = self.prune_threshold;
        let a = self.take_pair(i);
        let b = self.take_pair(j);
        let mix = |fa: &LinearForm, fb: &LinearForm| {
            let mut minus = fa.scaled_with_threshold(ct, thr);
            minus.add_scaled_with_threshold(fb, -cr, thr);
            let mut plus = fa.scaled_with_threshold(cr, thr);
            plus.add_scaled_with_threshold(fb, ct, thr);
            (minus, plus)
        };
        let (xi, xj) = mix(&a.x, &b.x);
        let (pi, pj) = mix(&a.p, &b.p);
        self.put_pair(i, ModePair { x: xi, p: pi });
        self.put_pair(j, ModePair { x: xj, p: pj });
        Ok(())
    }

    /// QND interaction with mode `i` as the position probe and mode `j` as
    /// the target:
    ///
    /// ```text
    /// x_i' = x_i        p_i' = p_i − p_j
    /// x_j' = x_i + x_j  p_j' = p_j
    /// ```
    pub fn apply_qnd(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_distinct_live(i, j, "qnd")?;
        let thr = self.prune_threshold;
        let a = self.take_pair(i);
        let mut b = self.take_pair(j);
        let mut pi = a.p.clone();
        pi.add_scaled_with_threshold(&b.p, -1.0, thr);
        b.x.add_scaled_with_threshold(&a.x, 1.0, thr);
        self.put_pair(i, ModePair { x: a.x, p: pi });
        self.put_pair(j, b);
        Ok(())
    }

    /// QND interaction with a phase adjust:
    ///
    /// ```text
    /// x_i' = x_i − x_j  p_i' = p_i
    /// x_j' = x_j        p_j' = p_i + p_j
    /// ```
    pub fn apply_qnd_phase_adjust(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_distinct_live(i, j, "qnd phase adjust")?;
        let thr = self.prune_threshold;
        let a = self.take_pair(i);
        let mut b = self.take_pair(j);
        let mut xi = a.x.clone();
        xi.add_scaled_with_threshold(&b.x, -1.0, thr);
        b.p.add_scaled_with_threshold(&a.p, 1.0, thr);
        self.put_pair(i, ModePair { x: xi, p: a.p });
        self.put_pair(j, b);
        Ok(())
    }

    /// Phase shift by π: `x → −x`, `p → −p`.
    pub fn apply_phase_pi(&mut self, i: usize) -> Result<()> {
        self.mode(i)?;
        let thr = self.prune_threshold;
        let a = self.take_pair(i);
        self.put_pair(
            i,
            ModePair {
                x: a.x.scaled_with_threshold(-1.0, thr),
                p: a.p.scaled_with_threshold(-1.0, thr),
            },
        );
        Ok(())
    }

    /// Fourier gate (90° phase-space rotation): `x → p`, `p → −x`.
    pub fn apply_fourier(&mut self, i: usize) -> Result<()> {
        self.mode(i)?;
        let thr = self.prune_threshold;
        let a = self.take_pair(i);
        self.put_pair(i, ModePair { x: a.p, p: a.x.scaled_with_threshold(-1.0, thr) });
        Ok(())
    }

    /// Apply an orthogonal matrix `o` jointly to the x-forms and p-forms of
    /// `modes` (row `k` of `o` becomes the new form of `modes[k]`). This is
    /// the passive linear-optics mixing used to assemble GHZ states and EPR
    /// pairs from squeezed vacua.
    pub fn apply_orthogonal(&mut self, modes: &[usize], o: &DMatrix<f64>) -> Result<()> {
        let n = modes.len();
        if o.nrows() != n || o.ncols() != n {
            return Err(Error::invalid(format!(
                "orthogonal mixing: matrix is {}×{} but {n} modes were given",
                o.nrows(),
                o.ncols()
            )));
        }
        let gram = o.transpose() * o;
        let dev = (gram - DMatrix::identity(n, n)).abs().max();
        if dev > SYMPLECTIC_TOL {
            return Err(Error::invalid(format!(
                "orthogonal mixing: OᵀO deviates from identity by {dev:.3e}"
            )));
        }
        for (a, &i) in modes.iter().enumerate() {
            self.mode(i)?;
            for &j in &modes[a + 1..] {
                if i == j {
                    return Err(Error::invalid(format!("orthogonal mixing: mode {i} repeated")));
                }
            }
        }
        let thr = self.prune_threshold;
        let old: Vec<ModePair> = modes.iter().map(|&i| self.take_pair(i)).collect();
        for (row, &target) in modes.iter().enumerate() {
            let mut x = LinearForm::zero();
            let mut p = LinearForm::zero();
            for (col, pair) in old.iter().enumerate() {
                let c = o[(row, col)];
                if c != 0.0 {
                    x.add_scaled_with_threshold(&pair.x, c, thr);
                    p.add_scaled_with_threshold(&pair.p, c, thr);
                }
            }
            self.put_pair(target, ModePair { x, p });
        }
        Ok(())
    }

    /// Homodyne-measure quadrature `q` of `measured_mode` with detector
    /// efficiency `eta`, broadcast the (rescaled) outcome classically, and
    /// displace each `(mode, quadrature, gain)` target by `gain` times the
    /// measured form.
    ///
    /// In the linear-form picture this adds `gain·f` to every target, where
    /// `f` is the measured form, and removes the measured mode. Detector
    /// inefficiency contributes one fresh detector-vacuum label per
    /// measurement, entering each target with coefficient
    /// `gain·√((1−η)/η)`; the label is shared across the targets of the
    /// same measurement, so common-mode detector noise cancels in
    /// receiver-to-receiver differences.
    pub fn homodyne_feedforward(
        &mut self,
        measured_mode: usize,
        q: Quadrature,
        targets: &[(usize, Quadrature, f64)],
        eta: f64,
    ) -> Result<()> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid(format!("homodyne efficiency {eta} outside (0, 1]")));
        }
        let measured = self.mode(measured_mode)?.form(q).clone();
        for &(m, _, _) in targets {
            if m == measured_mode {
                return Err(Error::invalid(format!(
                    "feed-forward target {m} is the measured mode"
                )));
            }
            self.mode(m)?;
        }
        let detector = BasisLabel::detector(self.detector_count, q);
        self.detector_count += 1;
        let noise_scale = ((1.0 - eta) / eta).sqrt();
        let thr = self.prune_threshold;
        let mut detector_used = false;
        for &(m, tq, gain) in targets {
            let pair = self.modes[m].as_mut().expect("target checked live");
            let form = match tq {
                Quadrature::X => &mut pair.x,
                Quadrature::P => &mut pair.p,
            };
            form.add_scaled_with_threshold(&measured, gain, thr);
            let noise = gain * noise_scale;
            if noise != 0.0 {
                form.add_scaled_with_threshold(&LinearForm::basis(detector), noise, thr);
                detector_used = true;
            }
        }
        if detector_used {
            self.variances.insert(detector, 1.0);
        }
        self.modes[measured_mode] = None;
        Ok(())
    }

    /// Exact variance of an input-free form:
    /// `Σ coef(label)² · Var(label)`.
    pub fn variance_of(&self, form: &LinearForm) -> Result<f64> {
        let inputs = form.input_terms();
        if !inputs.is_empty() {
            let desc = inputs
                .iter()
                .map(|(l, c)| format!("{c:+.3e}·{l}"))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(Error::SymbolicInput(desc));
        }
        let mut sum = 0.0;
        for (label, c) in form.sorted_terms() {
            let factor = self.variances.get(&label).copied().unwrap_or(1.0);
            sum += c * c * factor * self.vacuum_variance;
        }
        Ok(sum)
    }

    /// Evaluate `Ω` on every pair of canonical forms of the live modes and
    /// report deviations from the canonical values.
    pub fn symplectic_check(&self) -> SymplecticCheck {
        let live = self.live_indices();
        let mut entries = Vec::new();
        let mut violations = Vec::new();
        let mut max_deviation = 0.0_f64;
        let mut push = |modes: (usize, usize),
                        forms: (Quadrature, Quadrature),
                        value: f64,
                        expected: f64| {
            let entry = SymplecticEntry { modes, forms, value, expected };
            max_deviation = max_deviation.max((value - expected).abs());
            if (value - expected).abs() > SYMPLECTIC_TOL {
                violations.push(entry.clone());
            }
            entries.push(entry);
        };
        for (a, &i) in live.iter().enumerate() {
            let mi = self.modes[i].as_ref().unwrap();
            push((i, i), (Quadrature::X, Quadrature::P), symplectic_product(&mi.x, &mi.p), 1.0);
            for &j in &live[a + 1..] {
                let mj = self.modes[j].as_ref().unwrap();
                push((i, j), (Quadrature::X, Quadrature::P), symplectic_product(&mi.x, &mj.p), 0.0);
                push((i, j), (Quadrature::P, Quadrature::X), symplectic_product(&mi.p, &mj.x), 0.0);
                push((i, j), (Quadrature::X, Quadrature::X), symplectic_product(&mi.x, &mj.x), 0.0);
                push((i, j), (Quadrature::P, Quadrature::P), symplectic_product(&mi.p, &mj.p), 0.0);
            }
        }
        let pass = violations.is_empty();
        SymplecticCheck { entries, violations, max_deviation, tolerance: SYMPLECTIC_TOL, pass }
    }

    #[cfg(test)]
    pub(crate) fn corrupt_coefficient(&mut self, mode: usize, q: Quadrature, label: BasisLabel, delta: f64) {
        let pair = self.modes[mode].as_mut().unwrap();
        let form = match q {
            Quadrature::X => &mut pair.x,
            Quadrature::P => &mut pair.p,
        };
        form.add_scaled(&LinearForm::basis(label), delta);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::form::symplectic_product;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn xin(m: u32) -> BasisLabel {
        BasisLabel::input(m, Quadrature::X)
    }
    fn pin(m: u32) -> BasisLabel {
        BasisLabel::input(m, Quadrature::P)
    }
    fn xv(m: u32) -> BasisLabel {
        BasisLabel::vacuum(m, Quadrature::X)
    }

    #[test]
    fn new_register_identity_forms() {
        let reg = QuadratureRegister::new(1, &[]).unwrap();
        assert_eq!(reg.n_slots(), 1);
        assert_eq!(*reg.x_form(0).unwrap(), LinearForm::basis(xin(0)));
        assert_eq!(*reg.p_form(0).unwrap(), LinearForm::basis(pin(0)));
    }

    #[test]
    fn squeezing_assignment_records_variances() {
        let r = 0.7_f64;
        let reg = QuadratureRegister::new(0, &[r.exp(), (-r).exp(), (-r).exp(), (-r).exp()])
            .unwrap();
        assert_eq!(reg.n_slots(), 4);
        // antisqueezed assignment on mode 0: Var(x₀⁰) = e^{+2r}·σ²_vac
        assert_abs_diff_eq!(reg.variance_factor(&xv(0)).unwrap(), (2.0 * r).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(
            reg.variance_factor(&BasisLabel::vacuum(0, Quadrature::P)).unwrap(),
            (-2.0 * r).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(reg.variance_factor(&xv(1)).unwrap(), (-2.0 * r).exp(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_positive_squeezing_factor() {
        assert!(matches!(
            QuadratureRegister::new(0, &[1.0, 0.0]),
            Err(Error::InvalidParameter(_))
        ));
        assert!(QuadratureRegister::new(0, &[1.0, -2.0]).is_err());
    }

    #[test]
    fn fresh_register_passes_symplectic_check() {
        let reg = QuadratureRegister::new(1, &[1.0; 4]).unwrap();
        let check = reg.symplectic_check();
        assert!(check.pass, "violations: {:?}", check.violations);
        assert!(check.max_deviation == 0.0);
    }

    #[test]
    fn balanced_beam_splitter_makes_sum_and_difference_ports() {
        // mode 0 carries (x_A − x_A1)/√2, mode 1 carries (x_A + x_A1)/√2
        let mut reg = QuadratureRegister::new(2, &[]).unwrap();
        reg.apply_beam_splitter(0, 1, 0.5).unwrap();
        let s = 0.5_f64.sqrt();
        let x0 = reg.x_form(0).unwrap();
        assert_abs_diff_eq!(x0.coefficient(&xin(0)), s, epsilon = 1e-15);
        assert_abs_diff_eq!(x0.coefficient(&xin(1)), -s, epsilon = 1e-15);
        let x1 = reg.x_form(1).unwrap();
        assert_abs_diff_eq!(x1.coefficient(&xin(0)), s, epsilon = 1e-15);
        assert_abs_diff_eq!(x1.coefficient(&xin(1)), s, epsilon = 1e-15);
        let p0 = reg.p_form(0).unwrap();
        assert_abs_diff_eq!(p0.coefficient(&pin(0)), s, epsilon = 1e-15);
        assert_abs_diff_eq!(p0.coefficient(&pin(1)), -s, epsilon = 1e-15);
    }

    #[test]
    fn fully_transmissive_beam_splitter_is_identity() {
        let mut reg = QuadratureRegister::new(2, &[]).unwrap();
        let before = (reg.mode(0).unwrap().clone(), reg.mode(1).unwrap().clone());
        reg.apply_beam_splitter(0, 1, 1.0).unwrap();
        assert_eq!(*reg.mode(0).unwrap(), before.0);
        assert_eq!(*reg.mode(1).unwrap(), before.1);
    }

    #[test]
    fn beam_splitter_rejects_bad_parameters() {
        let mut reg = QuadratureRegister::new(2, &[]).unwrap();
        assert!(reg.apply_beam_splitter(0, 0, 0.5).is_err());
        assert!(reg.apply_beam_splitter(0, 2, 0.5).is_err());
        assert!(reg.apply_beam_splitter(0, 1, 1.5).is_err());
        assert!(reg.apply_beam_splitter(0, 1, -0.1).is_err());
    }

    #[test]
    fn beam_splitter_preserves_symplectic_form_for_any_t() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let mut reg = QuadratureRegister::new(3, &[]).unwrap();
            let t: f64 = rng.random();
            reg.apply_beam_splitter(0, 2, t).unwrap();
            reg.apply_beam_splitter(1, 2, rng.random()).unwrap();
            assert!(reg.symplectic_check().pass);
        }
    }

    #[test]
    fn qnd_matches_the_reference_transformation() {
        let mut reg = QuadratureRegister::new(2, &[]).unwrap();
        reg.apply_qnd(0, 1).unwrap();
        // (x₁, p₁−p₂), (x₁+x₂, p₂)
        assert_eq!(*reg.x_form(0).unwrap(), LinearForm::basis(xin(0)));
        let p0 = reg.p_form(0).unwrap();
        assert_eq!(p0.coefficient(&pin(0)), 1.0);
        assert_eq!(p0.coefficient(&pin(1)), -1.0);
        let x1 = reg.x_form(1).unwrap();
        assert_eq!(x1.coefficient(&xin(0)), 1.0);
        assert_eq!(x1.coefficient(&xin(1)), 1.0);
        assert_eq!(*reg.p_form(1).unwrap(), LinearForm::basis(pin(1)));
        assert!(reg.symplectic_check().pass);
    }

    #[test]
    fn qnd_applied_twice_is_not_identity() {
        let mut reg = QuadratureRegister::new(2, &[]).unwrap();
        reg.apply_qnd(0, 1).unwrap();
        reg.apply_qnd(0, 1).unwrap();
        let x1 = reg.x_form(1).unwrap();
        assert_eq!(x1.coefficient(&xin(0)), 2.0);
        assert_eq!(x1.coefficient(&xin(1)), 1.0);
    }

    #[test]
    fn qnd_phase_adjust_matches_the_reference_transformation() {
        let mut reg = QuadratureRegister::new(2, &[]).unwrap();
        reg.apply_qnd_phase_adjust(0, 1).unwrap();
        // (x₁−x₂, p₁), (x₂, p₁+p₂)
        let x0 = reg.x_form(0).unwrap();
        assert_eq!(x0.coefficient(&xin(0)), 1.0);
        assert_eq!(x0.coefficient(&xin(1)), -1.0);
        assert_eq!(*reg.p_form(0).unwrap(), LinearForm::basis(pin(0)));
        assert_eq!(*reg.x_form(1).unwrap(), LinearForm::basis(xin(1)));
        let p1 = reg.p_form(1).unwrap();
        assert_eq!(p1.coefficient(&pin(0)), 1.0);
        assert_eq!(p1.coefficient(&pin(1)), 1.0);
        // canonical pair preserved
        let m0 = reg.mode(0).unwrap();
        assert_eq!(symplectic_product(&m0.x, &m0.p), 1.0);
    }

    #[test]
    fn qnd_then_phase_adjust_reproduces_the_sender_composite() {
        // QND(2,3) then QND-phase-adjust(1,3) on identity forms gives the
        // sender rows of the chain construction:
        //   x_1' = x₁ − (x₂ + x₃), p_1' = p₁
        //   x_2' = x₂,             p_2' = p₂ − p₃
        let mut reg = QuadratureRegister::new(3, &[]).unwrap();
        reg.apply_qnd(1, 2).unwrap();
        reg.apply_qnd_phase_adjust(0, 2).unwrap();
        let x0 = reg.x_form(0).unwrap();
        assert_eq!(x0.coefficient(&xin(0)), 1.0);
        assert_eq!(x0.coefficient(&xin(1)), -1.0);
        assert_eq!(x0.coefficient(&xin(2)), -1.0);
        assert_eq!(*reg.p_form(0).unwrap(), LinearForm::basis(pin(0)));
        assert_eq!(*reg.x_form(1).unwrap(), LinearForm::basis(xin(1)));
        let p1 = reg.p_form(1).unwrap();
        assert_eq!(p1.coefficient(&pin(1)), 1.0);
        assert_eq!(p1.coefficient(&pin(2)), -1.0);
        assert!(reg.symplectic_check().pass);
    }

    #[test]
    fn phase_pi_is_an_involution() {
        let mut reg = QuadratureRegister::new(1, &[]).unwrap();
        reg.apply_phase_pi(0).unwrap();
        assert_eq!(reg.x_form(0).unwrap().coefficient(&xin(0)), -1.0);
        assert_eq!(reg.p_form(0).unwrap().coefficient(&pin(0)), -1.0);
        reg.apply_phase_pi(0).unwrap();
        assert_eq!(*reg.x_form(0).unwrap(), LinearForm::basis(xin(0)));
        assert_eq!(*reg.p_form(0).unwrap(), LinearForm::basis(pin(0)));
    }

    #[test]
    fn fourier_rotates_the_quadratures() {
        let mut reg = QuadratureRegister::new(1, &[]).unwrap();
        reg.apply_fourier(0).unwrap();
        assert_eq!(*reg.x_form(0).unwrap(), LinearForm::basis(pin(0)));
        assert_eq!(reg.p_form(0).unwrap().coefficient(&xin(0)), -1.0);
        assert!(reg.symplectic_check().pass);
        // four applications give the identity back
        for _ in 0..3 {
            reg.apply_fourier(0).unwrap();
        }
        assert_eq!(*reg.x_form(0).unwrap(), LinearForm::basis(xin(0)));
    }

    #[test]
    fn feedforward_with_zero_gain_only_removes_the_mode() {
        let mut reg = QuadratureRegister::new(3, &[]).unwrap();
        let before = reg.mode(1).unwrap().clone();
        reg.homodyne_feedforward(0, Quadrature::X, &[(1, Quadrature::X, 0.0)], 0.8).unwrap();
        assert_eq!(*reg.mode(1).unwrap(), before);
        assert!(matches!(reg.mode(0), Err(Error::StaleMode(0))));
        assert_eq!(reg.live_indices(), vec![1, 2]);
    }

    #[test]
    fn measuring_a_mode_twice_is_a_stale_mode_error() {
        let mut reg = QuadratureRegister::new(2, &[]).unwrap();
        reg.homodyne_feedforward(0, Quadrature::X, &[], 1.0).unwrap();
        let err = reg.homodyne_feedforward(0, Quadrature::X, &[], 1.0);
        assert!(matches!(err, Err(Error::StaleMode(0))));
    }

    #[test]
    fn feedforward_rejects_bad_eta_and_self_target() {
        let mut reg = QuadratureRegister::new(2, &[]).unwrap();
        assert!(reg.homodyne_feedforward(0, Quadrature::X, &[], 0.0).is_err());
        assert!(reg.homodyne_feedforward(0, Quadrature::X, &[], 1.1).is_err());
        assert!(reg
            .homodyne_feedforward(0, Quadrature::X, &[(0, Quadrature::X, 1.0)], 1.0)
            .is_err());
    }

    #[test]
    fn detector_noise_is_one_shared_label_per_measurement() {
        let mut reg = QuadratureRegister::new(3, &[]).unwrap();
        let eta = 0.9;
        let gain = 2.0_f64.sqrt();
        reg.homodyne_feedforward(
            0,
            Quadrature::X,
            &[(1, Quadrature::X, gain), (2, Quadrature::X, gain)],
            eta,
        )
        .unwrap();
        let det = BasisLabel::detector(0, Quadrature::X);
        let expected = gain * ((1.0 - eta) / eta).sqrt();
        assert_abs_diff_eq!(reg.x_form(1).unwrap().coefficient(&det), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(reg.x_form(2).unwrap().coefficient(&det), expected, epsilon = 1e-15);
        assert_eq!(reg.variance_factor(&det), Some(1.0));
        // the shared label cancels in the receiver-to-receiver difference
        let diff = reg.x_form(1).unwrap() - reg.x_form(2).unwrap();
        assert_eq!(diff.coefficient(&det), 0.0);
    }

    #[test]
    fn variance_of_zero_form_is_zero() {
        let reg = QuadratureRegister::new(0, &[1.0]).unwrap();
        assert_eq!(reg.variance_of(&LinearForm::zero()).unwrap(), 0.0);
    }

    #[test]
    fn variance_of_rejects_symbolic_input_labels() {
        let reg = QuadratureRegister::new(1, &[1.0]).unwrap();
        let f = reg.x_form(0).unwrap().clone();
        assert!(matches!(reg.variance_of(&f), Err(Error::SymbolicInput(_))));
    }

    #[test]
    fn variance_is_invariant_under_basis_label_permutation() {
        let r = 0.4_f64;
        let reg = QuadratureRegister::new(0, &[r.exp(), (-r).exp(), 1.0]).unwrap();
        let mut f = reg.x_form(0).unwrap().clone();
        f.add_scaled(reg.x_form(1).unwrap(), -0.5);
        f.add_scaled(reg.p_form(2).unwrap(), 2.0);
        let v = reg.variance_of(&f).unwrap();

        // permute vacuum mode ids 0 → 2 → 1 → 0 in both the form and the
        // register that carries the matching squeezing assignment
        let perm = |l: BasisLabel| match l.kind {
            crate::LabelKind::Vacuum => BasisLabel::vacuum((l.mode + 2) % 3, l.quadrature),
            _ => l,
        };
        let g = f.relabeled(perm);
        let reg2 = QuadratureRegister::new(0, &[(-r).exp(), 1.0, r.exp()]).unwrap();
        assert_abs_diff_eq!(reg2.variance_of(&g).unwrap(), v, epsilon = 1e-15);
    }

    #[test]
    fn symplectic_check_names_a_corrupted_coefficient() {
        let mut reg = QuadratureRegister::new(2, &[]).unwrap();
        reg.corrupt_coefficient(1, Quadrature::X, xin(0), 1e-3);
        let check = reg.symplectic_check();
        assert!(!check.pass);
        assert!(!check.violations.is_empty());
        let v = &check.violations[0];
        assert!(v.modes == (0, 1) || v.modes == (1, 1));
    }

    #[test]
    fn random_gate_sequences_preserve_the_symplectic_form() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..40 {
            let n = rng.random_range(2..=8usize);
            let mut reg = QuadratureRegister::new(n / 2, &vec![1.0; n - n / 2]).unwrap();
            let len = rng.random_range(1..=50usize);
            for _ in 0..len {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n);
                while j == i {
                    j = rng.random_range(0..n);
                }
                match rng.random_range(0..5u8) {
                    0 => reg.apply_beam_splitter(i, j, rng.random()).unwrap(),
                    1 => reg.apply_qnd(i, j).unwrap(),
                    2 => reg.apply_qnd_phase_adjust(i, j).unwrap(),
                    3 => reg.apply_phase_pi(i).unwrap(),
                    _ => reg.apply_fourier(i).unwrap(),
                }
            }
            let check = reg.symplectic_check();
            assert!(check.pass, "max deviation {}", check.max_deviation);
        }
    }
}
