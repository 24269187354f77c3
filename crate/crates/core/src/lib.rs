//! Single-laser spin pumping and repumping in a charged quantum dot.
//!
//! - [`quantum`]: Lindblad model of the four-level double-Λ system, its
//!   Liouvillian and stationary state, with a time-integration cross-check.
//! - [`scan`]: detuning scans, g-factor and drive-power sweeps, FWHM.
//! - [`fit`]: Lorentzian peak fitting, Zeeman and diamagnetic analysis,
//!   fine-structure splitting, saturation and broadening curves, synthetic
//!   spectra.
//! - [`cli`]: the `spinpump` command line.
//!
//! Rates inside [`quantum::SystemParams`] are angular frequencies (rad/ns);
//! public helpers and files use `x/2π` in GHz and energies in μeV.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod fit;
pub mod quantum;
pub mod scan;
pub mod units;
