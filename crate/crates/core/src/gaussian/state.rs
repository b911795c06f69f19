//! Gaussian states and symplectic transformations.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::heisenberg::Quadrature;
use crate::{SYMPLECTIC_TOL, VACUUM_VARIANCE};

/// The symplectic form `Ω` in interleaved ordering: block-diagonal with
/// `[[0, 1], [-1, 0]]` per mode.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// A Gaussian state: mean vector and covariance matrix over `2n`
/// quadratures in the order `x₁, p₁, …, xₙ, pₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    vacuum_variance: f64,
}

impl GaussianState {
    /// `n`-mode vacuum: zero mean, covariance `σ²_vac · I`.
    pub fn vacuum(n: usize) -> Self {
        Self::vacuum_with_variance(n, VACUUM_VARIANCE)
    }

    pub fn vacuum_with_variance(n: usize, sigma2: f64) -> Self {
        GaussianState {
            mean: DVector::zeros(2 * n),
            cov: DMatrix::identity(2 * n, 2 * n) * sigma2,
            vacuum_variance: sigma2,
        }
    }

    /// Single-mode squeezed vacuum: variance `σ²_vac·e^{-2r}` on the
    /// squeezed quadrature and `σ²_vac·e^{+2r}` on the conjugate.
    pub fn squeezed_vacuum(r: f64, squeezed: Quadrature) -> Self {
        let mut state = Self::vacuum(1);
        let (sq, anti) = match squeezed {
            Quadrature::X => (0, 1),
            Quadrature::P => (1, 0),
        };
        state.cov[(sq, sq)] *= (-2.0 * r).exp();
        state.cov[(anti, anti)] *= (2.0 * r).exp();
        state
    }

    /// Single mode with x-amplitude scale `s`: `Var(x) = s²σ²`,
    /// `Var(p) = σ²/s²`. Matches the register's vacuum-spec convention.
    pub fn from_x_factor(s: f64, sigma2: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!("squeezing factor must be positive, got {s}")));
        }
        let mut state = Self::vacuum_with_variance(1, sigma2);
        state.cov[(0, 0)] = s * s * sigma2;
        state.cov[(1, 1)] = sigma2 / (s * s);
        Ok(state)
    }

    /// Single-mode coherent state: vacuum covariance, mean `(x₀, p₀)`.
    pub fn coherent(x0: f64, p0: f64) -> Self {
        let mut state = Self::vacuum(1);
        state.mean[0] = x0;
        state.mean[1] = p0;
        state
    }

    /// Construct from explicit moments (symmetrizes the covariance).
    pub fn from_moments(mean: DVector<f64>, cov: DMatrix<f64>, vacuum_variance: f64) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() || mean.len() % 2 != 0 {
            return Err(Error::invalid("moments have inconsistent dimensions".to_string()));
        }
        let sym = (&cov + cov.transpose()) * 0.5;
        Ok(GaussianState { mean, cov: sym, vacuum_variance })
    }

    /// Tensor product with another state (its modes are appended).
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let n = self.mean.len();
        let m = other.mean.len();
        let mut mean = DVector::zeros(n + m);
        mean.rows_mut(0, n).copy_from(&self.mean);
        mean.rows_mut(n, m).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(n + m, n + m);
        cov.view_mut((0, 0), (n, n)).copy_from(&self.cov);
        cov.view_mut((n, n), (m, m)).copy_from(&other.cov);
        GaussianState { mean, cov, vacuum_variance: self.vacuum_variance }
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn vacuum_variance(&self) -> f64 {
        self.vacuum_variance
    }

    /// Flat index of quadrature `q` of mode `k`.
    pub fn index(&self, k: usize, q: Quadrature) -> usize {
        2 * k + match q {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }

    pub fn mean_of(&self, k: usize, q: Quadrature) -> f64 {
        self.mean[self.index(k, q)]
    }

    pub fn variance_of(&self, k: usize, q: Quadrature) -> f64 {
        let i = self.index(k, q);
        self.cov[(i, i)]
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        if k >= self.n_modes() {
            return Err(Error::invalid(format!(
                "mode {k} out of range ({} modes)",
                self.n_modes()
            )));
        }
        Ok(())
    }

    /// Apply a symplectic matrix: `mean ← S·mean`, `cov ← S·cov·Sᵀ`.
    /// Rejects `S` unless `S·Ω·Sᵀ = Ω` within tolerance.
    pub fn apply_symplectic(&mut self, s: &DMatrix<f64>) -> Result<()> {
        let d = self.mean.len();
        if s.nrows() != d || s.ncols() != d {
            return Err(Error::invalid(format!(
                "symplectic matrix is {}×{}, state needs {d}×{d}",
                s.nrows(),
                s.ncols()
            )));
        }
        let omega = symplectic_form(self.n_modes());
        let dev = (s * &omega * s.transpose() - &omega).abs().max();
        if dev > SYMPLECTIC_TOL {
            return Err(Error::invalid(format!(
                "matrix is not symplectic: max |SΩSᵀ − Ω| entry is {dev:.3e}"
            )));
        }
        self.mean = s * &self.mean;
        self.cov = s * &self.cov * s.transpose();
        self.resymmetrize();
        Ok(())
    }

    fn resymmetrize(&mut self) {
        let sym = (&self.cov + self.cov.transpose()) * 0.5;
        self.cov = sym;
    }

    /// Embed a per-mode block map into the identity on the full register.
    /// `block` maps old (x, p) rows of the listed modes to new ones; it is
    /// given in the interleaved ordering of just those modes.
    fn embed(&self, modes: &[usize], block: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        for &m in modes {
            self.check_mode(m)?;
        }
        let d = self.mean.len();
        let mut s = DMatrix::identity(d, d);
        for (bi, &mi) in modes.iter().enumerate() {
            for (bj, &mj) in modes.iter().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        s[(2 * mi + a, 2 * mj + b)] = block[(2 * bi + a, 2 * bj + b)];
                    }
                }
            }
        }
        Ok(s)
    }

    /// Beam splitter of transmissivity `t` on modes `(i, j)`; same port
    /// convention as the symbolic register.
    pub fn beam_splitter(&mut self, i: usize, j: usize, t: f64) -> Result<()> {
        if i == j {
            return Err(Error::invalid("beam splitter modes must be distinct".to_string()));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("beam splitter transmissivity {t} outside [0, 1]")));
        }
        let (ct, cr) = (t.sqrt(), (1.0 - t).sqrt());
        let mut block = DMatrix::zeros(4, 4);
        for q in 0..2 {
            block[(q, q)] = ct;
            block[(q, 2 + q)] = -cr;
            block[(2 + q, q)] = cr;
            block[(2 + q, 2 + q)] = ct;
        }
        let s = self.embed(&[i, j], &block)?;
        self.apply_symplectic(&s)
    }

    /// QND interaction, numeric twin of the register operation.
    pub fn qnd(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::invalid("qnd modes must be distinct".to_string()));
        }
        // rows: x_i' = x_i, p_i' = p_i − p_j, x_j' = x_i + x_j, p_j' = p_j
        let block = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, -1.0, //
                1.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        let s = self.embed(&[i, j], &block)?;
        self.apply_symplectic(&s)
    }

    /// QND interaction with a phase adjust, numeric twin of the register
    /// operation.
    pub fn qnd_phase_adjust(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::invalid("qnd modes must be distinct".to_string()));
        }
        // rows: x_i' = x_i − x_j, p_i' = p_i, x_j' = x_j, p_j' = p_i + p_j
        let block = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, -1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 1.0,
            ],
        );
        let s = self.embed(&[i, j], &block)?;
        self.apply_symplectic(&s)
    }

    /// Phase shift by π on one mode.
    pub fn phase_pi(&mut self, i: usize) -> Result<()> {
        let block = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]);
        let s = self.embed(&[i], &block)?;
        self.apply_symplectic(&s)
    }

    /// Fourier gate on one mode: `x → p`, `p → −x`.
    pub fn fourier(&mut self, i: usize) -> Result<()> {
        let block = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let s = self.embed(&[i], &block)?;
        self.apply_symplectic(&s)
    }

    /// Apply an orthogonal matrix jointly to the x- and p-quadratures of
    /// the listed modes (passive linear-optics mixing).
    pub fn orthogonal_mixing(&mut self, modes: &[usize], o: &DMatrix<f64>) -> Result<()> {
        let n = modes.len();
        if o.nrows() != n || o.ncols() != n {
            return Err(Error::invalid("orthogonal mixing dimension mismatch".to_string()));
        }
        let mut block = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                block[(2 * i, 2 * j)] = o[(i, j)];
                block[(2 * i + 1, 2 * j + 1)] = o[(i, j)];
            }
        }
        let s = self.embed(modes, &block)?;
        self.apply_symplectic(&s)
    }

    /// Displace quadrature `q` of mode `k` by `amount`; covariance is
    /// untouched.
    pub fn displace(&mut self, k: usize, q: Quadrature, amount: f64) -> Result<()> {
        self.check_mode(k)?;
        let i = self.index(k, q);
        self.mean[i] += amount;
        Ok(())
    }

    /// Homodyne-measure quadrature `q` of mode `k` with efficiency `eta`.
    ///
    /// The detected operator is `√η·q̂ + √(1−η)·v̂` with `v̂` a fresh vacuum
    /// quadrature, so the outcome is normal with mean `√η·μ_q` and variance
    /// `η·V_qq + (1−η)·σ²_vac`. The conditioned moments follow from the
    /// rank-1 Schur-complement update, and mode `k` is removed from the
    /// returned state.
    pub fn homodyne_measure(
        &self,
        k: usize,
        q: Quadrature,
        eta: f64,
        rng: &mut impl Rng,
    ) -> Result<(f64, GaussianState)> {
        self.check_mode(k)?;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid(format!("homodyne efficiency {eta} outside (0, 1]")));
        }
        let idx = self.index(k, q);
        let root_eta = eta.sqrt();
        // Vc and m with c = √η·e_idx
        let vc = self.cov.column(idx) * root_eta;
        let m = eta * self.cov[(idx, idx)] + (1.0 - eta) * self.vacuum_variance;
        let mu_out = root_eta * self.mean[idx];
        let noise: f64 = StandardNormal.sample(rng);
        let outcome = mu_out + m.sqrt() * noise;

        let gain = &vc / m;
        let mean = &self.mean + &gain * (outcome - mu_out);
        let cov = &self.cov - &vc * (&vc / m).transpose();

        let keep: Vec<usize> =
            (0..self.mean.len()).filter(|&i| i != 2 * k && i != 2 * k + 1).collect();
        let mut new_mean = DVector::zeros(keep.len());
        let mut new_cov = DMatrix::zeros(keep.len(), keep.len());
        for (a, &i) in keep.iter().enumerate() {
            new_mean[a] = mean[i];
            for (b, &j) in keep.iter().enumerate() {
                new_cov[(a, b)] = cov[(i, j)];
            }
        }
        let state = GaussianState::from_moments(new_mean, new_cov, self.vacuum_variance)?;
        Ok((outcome, state))
    }

    /// Draw one joint sample of all quadratures. Uses a symmetric
    /// eigendecomposition so exactly-pinned combinations (zero variance)
    /// sample correctly.
    pub fn sample(&self, rng: &mut impl Rng) -> DVector<f64> {
        let d = self.mean.len();
        let eig = self.cov.clone().symmetric_eigen();
        let mut z = DVector::zeros(d);
        for i in 0..d {
            let lambda = eig.eigenvalues[i].max(0.0);
            let g: f64 = StandardNormal.sample(rng);
            z[i] = lambda.sqrt() * g;
        }
        &self.mean + &eig.eigenvectors * z
    }

    /// Smallest eigenvalue of the covariance (PSD check helper).
    pub fn min_cov_eigenvalue(&self) -> f64 {
        self.cov.clone().symmetric_eigen().eigenvalues.min()
    }

    /// Max asymmetry of the covariance matrix.
    pub fn max_asymmetry(&self) -> f64 {
        (&self.cov - self.cov.transpose()).abs().max()
    }
}
