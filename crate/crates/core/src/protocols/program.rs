//! Engine-independent circuit programs.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::heisenberg::{Quadrature, QuadratureRegister};

/// One feed-forward target of a homodyne measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForwardTarget {
    pub mode: usize,
    pub quadrature: Quadrature,
    pub gain: f64,
}

/// One step of a protocol over a fixed mode layout.
#[derive(Debug, Clone)]
pub enum Step {
    /// Passive orthogonal mixing of several modes (GHZ/EPR assembly).
    OrthogonalMixing { modes: Vec<usize>, matrix: DMatrix<f64> },
    BeamSplitter { a: usize, b: usize, transmissivity: f64 },
    Qnd { control: usize, target: usize },
    QndPhaseAdjust { control: usize, target: usize },
    PhasePi { mode: usize },
    Fourier { mode: usize },
    /// Homodyne detection of one quadrature with efficiency `eta`, followed
    /// by classical feed-forward of the outcome to displacement targets.
    HomodyneFeedForward {
        mode: usize,
        quadrature: Quadrature,
        targets: Vec<FeedForwardTarget>,
        eta: f64,
    },
}

/// Result of a stochastic (numeric-engine) execution.
#[derive(Debug, Clone)]
pub struct GaussianRun {
    /// Final state over the surviving modes.
    pub state: GaussianState,
    /// Maps a program mode slot to its index in `state` (None = measured).
    pub slot_position: Vec<Option<usize>>,
    /// Homodyne outcomes in program order.
    pub outcomes: Vec<f64>,
}

impl GaussianRun {
    /// Position of a live slot in the final state.
    pub fn position(&self, slot: usize) -> Result<usize> {
        self.slot_position
            .get(slot)
            .copied()
            .flatten()
            .ok_or(Error::StaleMode(slot))
    }
}

/// A protocol: the initial mode layout plus the steps to run over it.
///
/// Mode slots `0..n_input_modes` are symbolic input modes; the remaining
/// slots are vacuum ancillas with the given x-amplitude factors (see
/// [`QuadratureRegister::new`]). Slot indices stay stable for the whole
/// program even after measurements.
#[derive(Debug, Clone)]
pub struct CircuitProgram {
    pub n_input_modes: usize,
    pub vacuum_x_factors: Vec<f64>,
    pub vacuum_variance: f64,
    pub steps: Vec<Step>,
}

impl CircuitProgram {
    pub fn new(n_input_modes: usize, vacuum_x_factors: Vec<f64>) -> Self {
        CircuitProgram {
            n_input_modes,
            vacuum_x_factors,
            vacuum_variance: crate::VACUUM_VARIANCE,
            steps: Vec::new(),
        }
    }

    pub fn n_slots(&self) -> usize {
        self.n_input_modes + self.vacuum_x_factors.len()
    }

    pub fn push(&mut self, step: Step) {
        self.steps.push(step);
    }

    /// Execute on the symbolic engine.
    pub fn run_symbolic(&self) -> Result<QuadratureRegister> {
        let mut reg = QuadratureRegister::new(self.n_input_modes, &self.vacuum_x_factors)?
            .with_vacuum_variance(self.vacuum_variance);
        self.run_symbolic_on(&mut reg)?;
        Ok(reg)
    }

    /// Execute the steps on an existing register (used by tests that run
    /// the circuit body over identity forms).
    pub fn run_symbolic_on(&self, reg: &mut QuadratureRegister) -> Result<()> {
        for step in &self.steps {
            match step {
                Step::OrthogonalMixing { modes, matrix } => reg.apply_orthogonal(modes, matrix)?,
                Step::BeamSplitter { a, b, transmissivity } => {
                    reg.apply_beam_splitter(*a, *b, *transmissivity)?
                }
                Step::Qnd { control, target } => reg.apply_qnd(*control, *target)?,
                Step::QndPhaseAdjust { control, target } => {
                    reg.apply_qnd_phase_adjust(*control, *target)?
                }
                Step::PhasePi { mode } => reg.apply_phase_pi(*mode)?,
                Step::Fourier { mode } => reg.apply_fourier(*mode)?,
                Step::HomodyneFeedForward { mode, quadrature, targets, eta } => {
                    let targets: Vec<(usize, Quadrature, f64)> =
                        targets.iter().map(|t| (t.mode, t.quadrature, t.gain)).collect();
                    reg.homodyne_feedforward(*mode, *quadrature, &targets, *eta)?
                }
            }
        }
        Ok(())
    }

    /// Execute on the numeric engine with stochastic homodyne outcomes.
    ///
    /// `input` provides the state of the input modes; vacuum ancillas are
    /// created from the program's squeezing factors. Feed-forward rescales
    /// the raw outcome by `1/√η` so the signal gain matches the symbolic
    /// model for any detector efficiency.
    pub fn run_gaussian(&self, input: &GaussianState, rng: &mut impl Rng) -> Result<GaussianRun> {
        if input.n_modes() != self.n_input_modes {
            return Err(Error::invalid(format!(
                "program expects {} input modes, state has {}",
                self.n_input_modes,
                input.n_modes()
            )));
        }
        let mut state = input.clone();
        if state.n_modes() == 0 {
            state = GaussianState::vacuum_with_variance(0, self.vacuum_variance);
        }
        for s in &self.vacuum_x_factors {
            state = state.tensor(&GaussianState::from_x_factor(*s, self.vacuum_variance)?);
        }
        let mut slot_position: Vec<Option<usize>> = (0..self.n_slots()).map(Some).collect();
        let mut outcomes = Vec::new();

        let pos = |map: &[Option<usize>], slot: usize| -> Result<usize> {
            map.get(slot).copied().flatten().ok_or(Error::StaleMode(slot))
        };

        for step in &self.steps {
            match step {
                Step::OrthogonalMixing { modes, matrix } => {
                    let m: Vec<usize> =
                        modes.iter().map(|&s| pos(&slot_position, s)).collect::<Result<_>>()?;
                    state.orthogonal_mixing(&m, matrix)?;
                }
                Step::BeamSplitter { a, b, transmissivity } => {
                    let (i, j) = (pos(&slot_position, *a)?, pos(&slot_position, *b)?);
                    state.beam_splitter(i, j, *transmissivity)?;
                }
                Step::Qnd { control, target } => {
                    let (i, j) = (pos(&slot_position, *control)?, pos(&slot_position, *target)?);
                    state.qnd(i, j)?;
                }
                Step::QndPhaseAdjust { control, target } => {
                    let (i, j) = (pos(&slot_position, *control)?, pos(&slot_position, *target)?);
                    state.qnd_phase_adjust(i, j)?;
                }
                Step::PhasePi { mode } => {
                    let i = pos(&slot_position, *mode)?;
                    state.phase_pi(i)?;
                }
                Step::Fourier { mode } => {
                    let i = pos(&slot_position, *mode)?;
                    state.fourier(i)?;
                }
                Step::HomodyneFeedForward { mode, quadrature, targets, eta } => {
                    let k = pos(&slot_position, *mode)?;
                    let (outcome, conditioned) = state.homodyne_measure(k, *quadrature, *eta, rng)?;
                    outcomes.push(outcome);
                    state = conditioned;
                    slot_position[*mode] = None;
                    for p in slot_position.iter_mut().flatten() {
                        if *p > k {
                            *p -= 1;
                        }
                    }
                    let signal = outcome / eta.sqrt();
                    for t in targets {
                        let i = pos(&slot_position, t.mode)?;
                        state.displace(i, t.quadrature, t.gain * signal)?;
                    }
                }
            }
        }
        Ok(GaussianRun { state, slot_position, outcomes })
    }
}
