//! GHZ-state and EPR-pair preparation from squeezed vacua.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::{from_heisenberg, GaussianState};
use crate::heisenberg::QuadratureRegister;
use crate::protocols::program::{CircuitProgram, Step};

/// The orthogonal mixing matrix of the N-mode GHZ construction: column 0
/// distributes the single x-antisqueezed mode evenly, and the remaining
/// columns form the Helmert-style pattern that mixes the x-squeezed modes.
///
/// With 0-based indices:
/// `O[i][0] = 1/√N`; for column `c ≥ 1`: `O[c−1][c] = √((N−c)/(N−c+1))`,
/// `O[i][c] = −1/√((N−c)(N−c+1))` for `i ≥ c`, zero above the diagonal.
pub fn helmert_matrix(n: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(n, n);
    for i in 0..n {
        o[(i, 0)] = 1.0 / (n as f64).sqrt();
    }
    for c in 1..n {
        let a = (n - c) as f64;
        o[(c - 1, c)] = (a / (a + 1.0)).sqrt();
        for i in c..n {
            o[(i, c)] = -1.0 / (a * (a + 1.0)).sqrt();
        }
    }
    o
}

fn check_ghz_params(n: usize, r: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("GHZ preparation needs at least 2 modes, got {n}")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("squeezing parameter must be ≥ 0, got {r}")));
    }
    Ok(())
}

/// Program preparing an `n`-mode GHZ state: small total momentum
/// (`Var(Σp) = n·e^{−2r}σ²`) and small relative positions
/// (`Var(xᵢ−xⱼ) = 2e^{−2r}σ²`).
pub fn ghz_program(n: usize, r: f64) -> Result<CircuitProgram> {
    check_ghz_params(n, r)?;
    let mut factors = vec![r.exp()];
    factors.extend(std::iter::repeat((-r).exp()).take(n - 1));
    let mut program = CircuitProgram::new(0, factors);
    program.push(Step::OrthogonalMixing { modes: (0..n).collect(), matrix: helmert_matrix(n) });
    Ok(program)
}

/// Fourier image of [`ghz_program`]: small total position and small
/// relative momenta.
pub fn ghz_mq_program(n: usize, r: f64) -> Result<CircuitProgram> {
    let mut program = ghz_program(n, r)?;
    for m in 0..n {
        program.push(Step::Fourier { mode: m });
    }
    Ok(program)
}

pub fn prepare_ghz(n: usize, r: f64) -> Result<QuadratureRegister> {
    ghz_program(n, r)?.run_symbolic()
}

pub fn prepare_ghz_state(n: usize, r: f64) -> Result<GaussianState> {
    let reg = prepare_ghz(n, r)?;
    from_heisenberg(&reg, &GaussianState::vacuum(0))
}

pub fn prepare_ghz_mq_variant(n: usize, r: f64) -> Result<QuadratureRegister> {
    ghz_mq_program(n, r)?.run_symbolic()
}

pub fn prepare_ghz_mq_variant_state(n: usize, r: f64) -> Result<GaussianState> {
    let reg = prepare_ghz_mq_variant(n, r)?;
    from_heisenberg(&reg, &GaussianState::vacuum(0))
}

/// Program preparing one EPR pair: the two-mode case of the GHZ
/// construction, with correlated positions and anticorrelated momenta
/// (`Var(x₁−x₂) = Var(p₁+p₂) = 2e^{−2r}σ²`).
pub fn epr_program(r: f64) -> Result<CircuitProgram> {
    ghz_program(2, r)
}

pub fn prepare_epr(r: f64) -> Result<QuadratureRegister> {
    prepare_ghz(2, r)
}

pub fn prepare_epr_state(r: f64) -> Result<GaussianState> {
    prepare_ghz_state(2, r)
}
