//! Product versus sum of two displaced Lorentzians on a simulated resonance.
//!
//! The displacement `s` (GHz) is the splitting mismatch |δ_e − δ_h|/2π and is
//! held fixed; only amplitudes and the common width are fitted.

use crate::scan::ResonanceProfile;

use nalgebra::{DMatrix, DVector};

use super::lm::{fit_curve, CurveModel, LmOptions};
use super::lorentz::{lorentzian, DisplacedProduct, DisplacedSum};
use super::FitError;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFit {
    pub params: Vec<f64>,
    pub sigma: Vec<f64>,
    pub rss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceFit {
    pub splitting_ghz: f64,
    /// `[A, w]` of `A·L(Δ − s/2; w)·L(Δ + s/2; w)`
    pub product: ModelFit,
    /// `[A₁, A₂, w]` of `A₁·L(Δ − s/2; w) + A₂·L(Δ + s/2; w)`
    pub sum: ModelFit,
}

impl ResonanceFit {
    pub fn product_preferred(&self) -> bool {
        self.product.rss < self.sum.rss
    }
}

pub fn fit_resonance_product(prof: &ResonanceProfile, splitting_ghz: f64) -> Result<ResonanceFit, FitError> {
    if !splitting_ghz.is_finite() || splitting_ghz < 0.0 {
        return Err(FitError::InvalidInput(format!("invalid splitting {splitting_ghz}")));
    }
    if !prof.is_unimodal() {
        return Err(FitError::NotUnimodal);
    }
    let (x, y) = (&prof.detunings, &prof.intensities);
    let peak = prof.peak();
    if !(peak > 0.0) {
        return Err(FitError::InvalidInput("profile is identically zero".into()));
    }
    let s = splitting_ghz;
    let width = half_max_width(x, y, peak);

    let prod_model = DisplacedProduct { splitting: s };
    let w = best_width(x, y, width, |xi, w| vec![lorentzian(xi, 0.5 * s, w) * lorentzian(xi, -0.5 * s, w)]);
    let a = linear_amplitudes(x, y, |xi| vec![prod_model.value(xi, &[1.0, w])]);
    let product = fit_curve(&prod_model, x, y, &[a[0], w], LmOptions::default())?;

    let sum_model = DisplacedSum { splitting: s };
    let w = best_width(x, y, width, |xi, w| vec![lorentzian(xi, 0.5 * s, w), lorentzian(xi, -0.5 * s, w)]);
    let a = linear_amplitudes(x, y, |xi| vec![lorentzian(xi, 0.5 * s, w), lorentzian(xi, -0.5 * s, w)]);
    let sum = fit_curve(&sum_model, x, y, &[a[0], a[1], w], LmOptions::default())?;

    let abs_width = |mut v: Vec<f64>| {
        let last = v.len() - 1;
        v[last] = v[last].abs();
        v
    };
    Ok(ResonanceFit {
        splitting_ghz,
        product: ModelFit { params: abs_width(product.params), sigma: product.sigma, rss: product.rss },
        sum: ModelFit { params: abs_width(sum.params), sigma: sum.sigma, rss: sum.rss },
    })
}

/// Least squares amplitudes for fixed basis functions.
fn linear_amplitudes(x: &[f64], y: &[f64], basis: impl Fn(f64) -> Vec<f64>) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = x.iter().map(|&xi| basis(xi)).collect();
    let k = rows[0].len();
    let a = DMatrix::from_fn(x.len(), k, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let ata = a.transpose() * &a;
    let atb = a.transpose() * b;
    match ata.cholesky() {
        Some(ch) => ch.solve(&atb).iter().copied().collect(),
        None => vec![0.0; k],
    }
}

/// Width minimising the residual once the amplitudes are eliminated: a log
/// grid around the observed width, then golden-section refinement.
fn best_width(x: &[f64], y: &[f64], observed: f64, basis: impl Fn(f64, f64) -> Vec<f64>) -> f64 {
    let reduced = |w: f64| {
        let amps = linear_amplitudes(x, y, |xi| basis(xi, w));
        x.iter().zip(y).map(|(&xi, &yi)| (yi - basis(xi, w).iter().zip(&amps).map(|(b, a)| a * b).sum::<f64>()).powi(2)).sum::<f64>()
    };
    let grid: Vec<f64> = (0..=60).map(|k| observed * 10f64.powf(-1.0 + 2.0 * k as f64 / 60.0)).collect();
    let costs: Vec<f64> = grid.iter().map(|&w| reduced(w)).collect();
    let k = (0..grid.len()).min_by(|&a, &b| costs[a].total_cmp(&costs[b])).unwrap_or(0);
    let (mut lo, mut hi) = (grid[k.saturating_sub(1)].ln(), grid[(k + 1).min(grid.len() - 1)].ln());
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if reduced(m1.exp()) <= reduced(m2.exp()) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    (0.5 * (lo + hi)).exp()
}

fn half_max_width(x: &[f64], y: &[f64], peak: f64) -> f64 {
    let above: Vec<f64> = x.iter().zip(y).filter(|(_, v)| **v >= 0.5 * peak).map(|(x, _)| *x).collect();
    let span = above.last().unwrap_or(&0.0) - above.first().unwrap_or(&0.0);
    let dx = (x[x.len() - 1] - x[0]).abs() / (x.len() - 1) as f64;
    span.max(dx)
}
