use std::fmt::Write as _;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::{Operator, SolverError, DIM};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// A 4×4 density matrix in the ordered basis |↓⟩, |↑⟩, lower trion, upper trion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    /// Wraps `m` after checking hermiticity, unit trace and positivity.
    pub fn new(m: Operator) -> Result<Self, SolverError> {
        let rho = Self(m);
        rho.check()?;
        Ok(rho)
    }

    pub(crate) fn new_unchecked(m: Operator) -> Self {
        Self(m)
    }

    /// The pure state |level⟩⟨level| (levels are numbered 1..=4).
    pub fn pure(level: usize) -> Result<Self, SolverError> {
        let idx = level_index(level)?;
        let mut m = Operator::zeros();
        m[(idx, idx)] = Complex64::new(1.0, 0.0);
        Ok(Self(m))
    }

    pub fn maximally_mixed() -> Self {
        Self(Operator::identity() * Complex64::new(1.0 / DIM as f64, 0.0))
    }

    pub fn matrix(&self) -> &Operator {
        &self.0
    }

    /// ⟨Π_level⟩, the real diagonal entry for `level` in 1..=4.
    pub fn population(&self, level: usize) -> Result<f64, SolverError> {
        let idx = level_index(level)?;
        Ok(self.0[(idx, idx)].re)
    }

    pub fn populations(&self) -> [f64; DIM] {
        std::array::from_fn(|i| self.0[(i, i)].re)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// max |ρ − ρ†| over all entries.
    pub fn hermiticity_error(&self) -> f64 {
        let diff = self.0 - self.0.adjoint();
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest elementwise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn check(&self) -> Result<(), SolverError> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(SolverError::InvalidState(format!("not Hermitian (error {herm:.3e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(SolverError::InvalidState(format!("trace {tr} != 1")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(SolverError::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// Plain-text dump: one row per line, `re+imj` entries separated by spaces.
    pub fn to_text(&self) -> String {
        format_operator(&self.0)
    }
}

pub(crate) fn level_index(level: usize) -> Result<usize, SolverError> {
    if (1..=DIM).contains(&level) {
        Ok(level - 1)
    } else {
        Err(SolverError::LevelOutOfRange(level))
    }
}

/// Row-major `re+imj` text form of a 4×4 operator.
pub fn format_operator(m: &Operator) -> String {
    let mut out = String::new();
    for r in 0..DIM {
        let row: Vec<String> = (0..DIM)
            .map(|c| {
                let z = m[(r, c)];
                let sign = if z.im.is_sign_negative() { '-' } else { '+' };
                format!("{:e}{}{:e}j", z.re, sign, z.im.abs())
            })
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}
