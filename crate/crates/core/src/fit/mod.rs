//! Spectroscopic data reduction: Lorentzian peak fitting, Zeeman series
//! analysis with diamagnetic-shift removal, g-factor and fine-structure
//! extraction, saturation and power-broadening fits, and the two-Lorentzian
//! models for the pump-repump resonance.

pub mod lm;
pub mod lorentz;
pub mod peaks;
pub mod resonance;
pub mod saturation;
pub mod spectrum;
pub mod synth;
pub mod zeeman;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("fit did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("all magnetic field values are zero")]
    ZeroField,
    #[error("non-physical negative Zeeman slope {slope:.4} μeV/T")]
    NegativeSlope { slope: f64 },
    #[error("profile is not single peaked")]
    NotUnimodal,
}
