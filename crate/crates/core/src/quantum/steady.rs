use num_complex::Complex64;

use super::liouvillian::{diag_index, unvec};
use super::{DensityMatrix, Liouvillian, SolverError, StateVector, DIM, SUPER_DIM};

/// Singular values below this fraction of ‖L‖₂ count toward the null space.
const RANK_TOL: f64 = 1e-9;

/// Dimension of the numerical null space of `l`.
pub fn null_space_dimension(l: &Liouvillian) -> usize {
    let sv = l.matrix().singular_values();
    let largest = sv.max();
    if largest == 0.0 {
        return SUPER_DIM;
    }
    sv.iter().filter(|&&s| s <= RANK_TOL * largest).count()
}

/// Unique stationary state of `l`, solved by replacing the population
/// equation of level 1 with the trace condition.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix, SolverError> {
    steady_state_replacing(l, 1)
}

/// Same as [`steady_state`] but overwrites the population equation of
/// `level` (1..=4). Only population rows may be replaced: the remaining
/// rows of a trace-preserving generator are linearly independent of the
/// trace row, so swapping one of them out would leave the system singular.
pub fn steady_state_replacing(l: &Liouvillian, level: usize) -> Result<DensityMatrix, SolverError> {
    let idx = super::density::level_index(level)?;
    let nullity = null_space_dimension(l);
    if nullity != 1 {
        return Err(SolverError::DegenerateSteadyState { dimension: nullity });
    }

    let row = diag_index(idx);
    let mut a = *l.matrix();
    for k in 0..SUPER_DIM {
        a[(row, k)] = Complex64::new(0.0, 0.0);
    }
    for r in 0..DIM {
        a[(row, diag_index(r))] = Complex64::new(1.0, 0.0);
    }
    let mut b = StateVector::zeros();
    b[row] = Complex64::new(1.0, 0.0);

    let x = a.lu().solve(&b).ok_or(SolverError::Singular)?;
    let rho = unvec(&x);
    let rho = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let state = DensityMatrix::new_unchecked(rho);
    state.check()?;
    Ok(state)
}
