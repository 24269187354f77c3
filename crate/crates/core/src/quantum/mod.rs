//! Four-level double-Λ model of a positively charged quantum dot in a
//! Voigt-geometry magnetic field, driven by a single laser on the two inner
//! (vertically polarized) transitions.
//!
//! Levels are numbered 1..=4: |↓⟩, |↑⟩ (hole ground states), then the lower
//! and upper trion states. The laser couples 1↔3 and 2↔4; each trion decays
//! into both ground states. The detected signal is the population of level 4,
//! which feeds the highest-energy outer transition.

mod density;
mod evolve;
mod liouvillian;
mod operators;
mod params;
mod steady;

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use thiserror::Error;

pub use density::{format_operator, DensityMatrix};
pub use evolve::{evolve_to_steady_state, fastest_rate, master_rhs, rk4_step, EvolveOptions};
pub use liouvillian::{build_liouvillian, kron, unvec, vec, Liouvillian};
pub use operators::{build_collapse_operators, build_rotating_hamiltonian, transition, CollapseOp, CollapseSet};
pub use params::SystemParams;
pub use steady::{null_space_dimension, steady_state, steady_state_replacing};

pub const DIM: usize = 4;
pub const SUPER_DIM: usize = DIM * DIM;

pub type Operator = SMatrix<Complex64, DIM, DIM>;
pub type SuperOperator = SMatrix<Complex64, SUPER_DIM, SUPER_DIM>;
pub type StateVector = SVector<Complex64, SUPER_DIM>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("level {0} out of range 1..=4")]
    LevelOutOfRange(usize),
    #[error("steady state is not unique: null space has dimension {dimension}")]
    DegenerateSteadyState { dimension: usize },
    #[error("linear system is singular")]
    Singular,
    #[error("time evolution did not converge after {steps} steps (residual {residual:.3e})")]
    NoConvergence { steps: u64, residual: f64 },
}

/// Builds H̃, the collapse set and the Liouvillian for `p` and solves for the
/// stationary state.
pub fn solve(p: &SystemParams) -> Result<DensityMatrix, SolverError> {
    p.validate()?;
    let h = build_rotating_hamiltonian(p);
    let c = build_collapse_operators(p);
    steady_state(&build_liouvillian(&h, &c))
}

/// ⟨Π₄⟩ in the steady state, proportional to the detected count rate.
pub fn detection_intensity(p: &SystemParams) -> Result<f64, SolverError> {
    solve(p)?.population(4)
}

/// Steady state by time integration from `rho0`, with a step sized to `p`.
pub fn solve_by_evolution(p: &SystemParams, rho0: &DensityMatrix) -> Result<DensityMatrix, SolverError> {
    p.validate()?;
    let h = build_rotating_hamiltonian(p);
    let c = build_collapse_operators(p);
    evolve_to_steady_state(&h, &c, rho0, EvolveOptions::for_system(&h, &c))
}
