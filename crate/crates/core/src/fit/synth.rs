//! Synthetic quadruplet spectra for exercising the fitting chain.
//!
//! Line positions at field B: `E0 + κB² ± (δ_e + δ_h)/2` (outer pair,
//! H polarized) and `E0 + κB² ± (δ_e − δ_h)/2` (inner pair, V polarized),
//! with δ = μ_B·g·B. At B = 0 each pair collapses onto one line and the H and
//! V lines are split by the fine-structure splitting instead.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::units::zeeman_splitting;

use super::lorentz::lorentzian;
use super::spectrum::{AbscissaUnit, Polarization, SpectrumData};
use super::FitError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthTruth {
    /// Zero-field line centre, μeV.
    pub e0: f64,
    /// Diamagnetic coefficient, μeV/T².
    pub kappa: f64,
    pub g_e: f64,
    pub g_h: f64,
    pub field: f64,
    /// FWHM of every line, μeV.
    pub linewidth: f64,
    /// Peak counts of each outer line.
    pub outer_amplitude: f64,
    /// Peak counts of each inner line.
    pub inner_amplitude: f64,
    pub background: f64,
    /// Zero-field H/V splitting, μeV (V above H).
    pub fss: f64,
    pub polarization: Polarization,
    /// Sampling window half-width around `E0 + κB²`, μeV.
    pub half_window: f64,
    pub n_points: usize,
}

impl Default for SynthTruth {
    fn default() -> Self {
        Self {
            e0: 1_393_000.0,
            kappa: 5.07,
            g_e: 0.34,
            g_h: 0.34,
            field: 5.0,
            linewidth: 22.0,
            outer_amplitude: 1000.0,
            inner_amplitude: 1000.0,
            background: 0.0,
            fss: 0.0,
            polarization: Polarization::Unpolarized,
            half_window: 200.0,
            n_points: 801,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    None,
    Poisson,
}

/// Peak counts whose shot-noise signal-to-noise ratio is `snr`.
pub fn amplitude_for_snr(snr: f64) -> f64 {
    snr * snr
}

impl SynthTruth {
    /// (centre μeV, amplitude, polarization) of every line.
    pub fn lines(&self) -> Vec<(f64, f64, Polarization)> {
        let shift = self.e0 + self.kappa * self.field * self.field;
        if self.field == 0.0 {
            return vec![
                (shift - 0.5 * self.fss, 2.0 * self.outer_amplitude, Polarization::H),
                (shift + 0.5 * self.fss, 2.0 * self.inner_amplitude, Polarization::V),
            ];
        }
        let de = zeeman_splitting(self.g_e, self.field);
        let dh = zeeman_splitting(self.g_h, self.field);
        let outer = 0.5 * (de + dh);
        let inner = 0.5 * (de - dh);
        vec![
            (shift - outer, self.outer_amplitude, Polarization::H),
            (shift - inner, self.inner_amplitude, Polarization::V),
            (shift + inner, self.inner_amplitude, Polarization::V),
            (shift + outer, self.outer_amplitude, Polarization::H),
        ]
    }

    /// Lines visible in the requested polarization channel.
    pub fn visible_lines(&self) -> Vec<(f64, f64)> {
        self.lines()
            .into_iter()
            .filter(|&(_, _, pol)| self.polarization == Polarization::Unpolarized || pol == self.polarization)
            .map(|(c, a, _)| (c, a))
            .collect()
    }

    pub fn abscissa(&self) -> Vec<f64> {
        let mid = self.e0 + self.kappa * self.field * self.field;
        let n = (self.n_points - 1) as f64;
        (0..self.n_points).map(|i| mid - self.half_window + 2.0 * self.half_window * i as f64 / n).collect()
    }
}

/// Noise-free or Poisson-sampled spectrum for `truth`. The generator is
/// seeded per call, so a fixed seed gives identical output.
pub fn synthesize_spectrum(truth: &SynthTruth, noise: Noise, seed: u64) -> Result<SpectrumData, FitError> {
    if !(truth.linewidth > 0.0) {
        return Err(FitError::InvalidInput("linewidth must be > 0".into()));
    }
    if truth.n_points < 2 || !(truth.half_window > 0.0) {
        return Err(FitError::InvalidInput("sampling window is empty".into()));
    }
    let x = truth.abscissa();
    let lines = truth.visible_lines();
    let clean: Vec<f64> = x
        .iter()
        .map(|&e| truth.background + lines.iter().map(|&(c, a)| a * lorentzian(e, c, truth.linewidth)).sum::<f64>())
        .collect();
    let counts = match noise {
        Noise::None => clean,
        Noise::Poisson => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            clean
                .iter()
                .map(|&mean| {
                    if mean > 0.0 {
                        Poisson::new(mean).map(|d| d.sample(&mut rng)).unwrap_or(mean)
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    };
    SpectrumData::new(x, AbscissaUnit::MicroEv, counts, truth.polarization, truth.field)
}
