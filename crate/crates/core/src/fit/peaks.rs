//! Multi-Lorentzian peak fitting with model-order selection.
//!
//! Spectra are treated as photon counts: after an unweighted first pass the
//! fit is repeated with weights 1/σ² taken from the fitted counts, so the
//! residual used by the F test is a χ².

use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::lm::{fit_curve, fit_curve_weighted, CurveModel, LmFit, LmOptions};
use super::lorentz::{lorentzian, LorentzianSum};
use super::spectrum::SpectrumData;
use super::FitError;

/// Scaled normal-matrix condition number above which a fit is flagged.
const ILL_CONDITION: f64 = 1e10;
/// Smallest variance used as a weight, relative to the largest count.
const VARIANCE_FLOOR: f64 = 1e-3;
/// p-value threshold for accepting an extra peak.
pub const F_TEST_THRESHOLD: f64 = 0.01;
/// Narrowest accepted line relative to the broadest one in the same fit.
const MIN_WIDTH_RATIO: f64 = 0.25;
/// Closest accepted pair of centers, in units of their combined 1σ.
const MIN_SEPARATION: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakFit {
    /// μeV
    pub center: f64,
    /// μeV
    pub fwhm: f64,
    /// counts
    pub amplitude: f64,
    pub center_sigma: f64,
    pub fwhm_sigma: f64,
    pub amplitude_sigma: f64,
}

/// Initial guess for one peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakSeed {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakFitReport {
    /// Sorted by center.
    pub peaks: Vec<PeakFit>,
    pub background: f64,
    pub background_sigma: f64,
    /// Σ((y − f)²/σ²) with σ² the fitted counts (shot-noise weighting).
    pub rss: f64,
    /// sqrt(RSS)
    pub residual_norm: f64,
    pub n_points: usize,
    /// Near-degenerate peaks: parameters are returned but the uncertainties
    /// are large or infinite.
    pub ill_conditioned: bool,
    pub iterations: usize,
}

impl PeakFitReport {
    pub fn n_params(&self) -> usize {
        1 + 3 * self.peaks.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.center).collect()
    }
}

/// Whether every line of `r` is distinguishable from its neighbours: no line
/// much narrower than the others and every pair of centers separated by
/// more than their uncertainty. Noise otherwise gets absorbed by slivers or
/// by coincident doublets.
pub fn resolved(r: &PeakFitReport) -> bool {
    let widest = r.peaks.iter().map(|p| p.fwhm).fold(0.0, f64::max);
    r.peaks.iter().all(|p| p.amplitude > 0.0 && p.fwhm >= MIN_WIDTH_RATIO * widest)
        && r.peaks.windows(2).all(|w| {
            let sep_sigma = w[0].center_sigma.hypot(w[1].center_sigma);
            w[1].center - w[0].center >= MIN_SEPARATION * sep_sigma
        })
}

/// Least squares fit of `n` Lorentzians on a constant background.
pub fn fit_peaks(s: &SpectrumData, n: usize, seeds: Option<&[PeakSeed]>) -> Result<PeakFitReport, FitError> {
    s.validate()?;
    if n == 0 {
        return Err(FitError::InvalidInput("need at least one peak".into()));
    }
    let (x, y) = s.energy_series();
    if y.iter().all(|&c| c == 0.0) {
        return Err(FitError::InvalidInput("spectrum has no counts".into()));
    }
    if x.len() < 1 + 3 * n {
        return Err(FitError::InsufficientPoints { needed: 1 + 3 * n, got: x.len() });
    }

    let background = lower_quantile(&y, 0.05);
    let seeds = match seeds {
        Some(s) if s.len() == n => s.to_vec(),
        Some(s) => return Err(FitError::InvalidInput(format!("{} seeds supplied for {n} peaks", s.len()))),
        None => auto_seeds(&x, &y, background, n),
    };

    // Fit on an abscissa centred on the data for conditioning.
    let origin = 0.5 * (x[0] + x[x.len() - 1]);
    let xc: Vec<f64> = x.iter().map(|v| v - origin).collect();
    let mut init = vec![background];
    for sd in &seeds {
        init.extend([sd.amplitude, sd.center - origin, sd.fwhm]);
    }

    let model = LorentzianSum { n_peaks: n };
    let fit = fit_curve(&model, &xc, &y, &init, LmOptions::default())?;
    // Refit with the shot-noise variance of the first fit as weights. The
    // floor is relative so that rescaling the counts leaves the fit unchanged.
    let floor = VARIANCE_FLOOR * y.iter().copied().fold(0.0, f64::max);
    let sigma: Vec<f64> = xc.iter().map(|&xi| model.value(xi, &fit.params).max(floor).sqrt()).collect();
    let fit = fit_curve_weighted(&model, &xc, &y, Some(&sigma), &fit.params, LmOptions::default())?;
    Ok(report(&fit, n, origin))
}

fn report(fit: &LmFit, n: usize, origin: f64) -> PeakFitReport {
    let p = &fit.params;
    let sg = &fit.sigma;
    let mut peaks: Vec<PeakFit> = (0..n)
        .map(|k| PeakFit {
            amplitude: p[1 + 3 * k],
            center: p[2 + 3 * k] + origin,
            fwhm: p[3 + 3 * k].abs(),
            amplitude_sigma: sg[1 + 3 * k],
            center_sigma: sg[2 + 3 * k],
            fwhm_sigma: sg[3 + 3 * k],
        })
        .collect();
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    let close = peaks.windows(2).any(|w| (w[1].center - w[0].center) < 0.1 * w[0].fwhm.min(w[1].fwhm));
    let ill_conditioned = fit.condition > ILL_CONDITION || sg.iter().any(|v| !v.is_finite()) || close;
    PeakFitReport {
        peaks,
        background: p[0],
        background_sigma: sg[0],
        rss: fit.rss,
        residual_norm: fit.rss.sqrt(),
        n_points: fit.n_points,
        ill_conditioned,
        iterations: fit.iterations,
    }
}

/// Seeds from the highest maxima of the running residual: each pick is
/// subtracted as a Lorentzian before the next is taken. A pick that barely
/// rises above the residual is replaced by splitting the strongest seed,
/// which handles blended lines.
pub fn auto_seeds(x: &[f64], y: &[f64], background: f64, n: usize) -> Vec<PeakSeed> {
    let dx = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    let mut resid: Vec<f64> = y.iter().map(|v| v - background).collect();
    let mut seeds: Vec<PeakSeed> = Vec::with_capacity(n);
    let mut first_amp = 0.0;

    while seeds.len() < n {
        let (imax, &amp) = resid.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty spectrum");
        if seeds.is_empty() {
            first_amp = amp;
        }
        if !seeds.is_empty() && amp < 0.1 * first_amp {
            // Split the strongest seed into two halves.
            let k = (0..seeds.len()).max_by(|&a, &b| seeds[a].amplitude.total_cmp(&seeds[b].amplitude)).unwrap();
            let s = seeds[k];
            let offset = 0.25 * s.fwhm;
            seeds[k] = PeakSeed { center: s.center - offset, fwhm: 0.8 * s.fwhm, amplitude: 0.5 * s.amplitude };
            seeds.push(PeakSeed { center: s.center + offset, fwhm: 0.8 * s.fwhm, amplitude: 0.5 * s.amplitude });
            continue;
        }
        let fwhm = local_fwhm(x, &resid, imax).max(2.0 * dx.abs());
        let seed = PeakSeed { center: x[imax], fwhm, amplitude: amp };
        for (r, &xi) in resid.iter_mut().zip(x) {
            *r -= amp * lorentzian(xi, seed.center, seed.fwhm);
        }
        seeds.push(seed);
    }
    seeds
}

fn local_fwhm(x: &[f64], y: &[f64], peak: usize) -> f64 {
    let half = 0.5 * y[peak];
    let left = (0..peak).rev().find(|&i| y[i] < half).map(|i| x[i]).unwrap_or(x[0]);
    let right = (peak + 1..y.len()).find(|&i| y[i] < half).map(|i| x[i]).unwrap_or(x[x.len() - 1]);
    right - left
}

fn lower_quantile(y: &[f64], q: f64) -> f64 {
    let mut v = y.to_vec();
    v.sort_by(f64::total_cmp);
    v[((v.len() - 1) as f64 * q).round() as usize]
}

/// p-value of the F test for the improvement from `simple` to `complex`.
pub fn f_test_p_value(simple: &PeakFitReport, complex: &PeakFitReport) -> f64 {
    let extra = complex.n_params().saturating_sub(simple.n_params());
    let dof = complex.n_points.saturating_sub(complex.n_params());
    if extra == 0 || dof == 0 {
        return 1.0;
    }
    let gain = simple.rss - complex.rss;
    if gain <= 0.0 {
        return 1.0;
    }
    if complex.rss <= 0.0 {
        return 0.0;
    }
    let f = (gain / extra as f64) / (complex.rss / dof as f64);
    match FisherSnedecor::new(extra as f64, dof as f64) {
        Ok(dist) => 1.0 - dist.cdf(f),
        Err(_) => 1.0,
    }
}

/// Fits each candidate peak count in increasing order and keeps the larger
/// model only while the F test p-value stays below `threshold`. Candidates
/// that fail to converge are skipped.
pub fn fit_peaks_auto(s: &SpectrumData, candidates: &[usize], threshold: f64) -> Result<PeakFitReport, FitError> {
    let (_, y) = s.energy_series();
    let scale: f64 = y.iter().map(|v| v * v).sum();
    let mut best: Option<PeakFitReport> = None;
    let mut first_err = None;
    for &n in candidates {
        let fit = match fit_peaks(s, n, None) {
            Ok(f) => f,
            Err(e) => {
                first_err.get_or_insert(e);
                continue;
            }
        };
        best = match best {
            None => Some(fit),
            Some(prev) if !resolved(&fit) => Some(prev),
            Some(prev) => {
                let exact = prev.rss <= 1e-18 * scale;
                if !exact && f_test_p_value(&prev, &fit) < threshold {
                    Some(fit)
                } else {
                    Some(prev)
                }
            }
        };
    }
    best.ok_or_else(|| first_err.unwrap_or(FitError::InvalidInput("no candidate peak counts".into())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::spectrum::{AbscissaUnit, Polarization};

    fn spectrum(lines: &[(f64, f64, f64)], bg: f64) -> SpectrumData {
        let x: Vec<f64> = (0..801).map(|i| -200.0 + 0.5 * i as f64).collect();
        let y = x.iter().map(|&e| bg + lines.iter().map(|&(a, c, w)| a * lorentzian(e, c, w)).sum::<f64>()).collect();
        SpectrumData::new(x, AbscissaUnit::MicroEv, y, Polarization::Unpolarized, 0.0).unwrap()
    }

    #[test]
    fn single_lorentzian_recovered_exactly() {
        let s = spectrum(&[(1000.0, 0.0, 22.0)], 0.0);
        let r = fit_peaks(&s, 1, None).unwrap();
        let p = r.peaks[0];
        assert!(p.center.abs() < 1e-6 * 22.0);
        assert!((p.fwhm - 22.0).abs() / 22.0 < 1e-6);
        assert!((p.amplitude - 1000.0).abs() / 1000.0 < 1e-6);
        assert!(r.background.abs() < 1e-3);
    }

    #[test]
    fn two_separated_peaks_sorted() {
        let s = spectrum(&[(500.0, 60.0, 20.0), (800.0, -50.0, 25.0)], 10.0);
        let r = fit_peaks(&s, 2, None).unwrap();
        assert!((r.peaks[0].center + 50.0).abs() < 1e-6);
        assert!((r.peaks[1].center - 60.0).abs() < 1e-6);
        assert!(!r.ill_conditioned);
    }

    #[test]
    fn supplied_seeds_are_used() {
        let s = spectrum(&[(500.0, 60.0, 20.0), (800.0, -50.0, 25.0)], 10.0);
        let seeds = [
            PeakSeed { center: -40.0, fwhm: 30.0, amplitude: 700.0 },
            PeakSeed { center: 50.0, fwhm: 30.0, amplitude: 400.0 },
        ];
        let r = fit_peaks(&s, 2, Some(&seeds)).unwrap();
        assert!((r.peaks[1].amplitude - 500.0).abs() < 1e-6);
        assert!(fit_peaks(&s, 2, Some(&seeds[..1])).is_err());
    }

    #[test]
    fn shift_and_scale_equivariance() {
        let base = spectrum(&[(900.0, -30.0, 22.0), (450.0, 35.0, 18.0)], 5.0);
        let r0 = fit_peaks(&base, 2, None).unwrap();

        let mut shifted = base.clone();
        shifted.abscissa.iter_mut().for_each(|v| *v += 1_393_000.0);
        let r1 = fit_peaks(&shifted, 2, None).unwrap();
        for (a, b) in r0.peaks.iter().zip(&r1.peaks) {
            assert!((b.center - a.center - 1_393_000.0).abs() < 1e-5);
            assert!((b.fwhm - a.fwhm).abs() < 1e-6);
        }

        let mut scaled = base.clone();
        scaled.counts.iter_mut().for_each(|v| *v *= 7.0);
        let r2 = fit_peaks(&scaled, 2, None).unwrap();
        for (a, b) in r0.peaks.iter().zip(&r2.peaks) {
            assert!((b.amplitude - 7.0 * a.amplitude).abs() < 1e-6 * b.amplitude);
            assert!((b.center - a.center).abs() < 1e-6);
        }
    }

    #[test]
    fn model_order_prefers_fewer_peaks_on_exact_data() {
        let s = spectrum(&[(1000.0, 0.0, 22.0)], 0.0);
        let r = fit_peaks_auto(&s, &[1, 2, 4], F_TEST_THRESHOLD).unwrap();
        assert_eq!(r.peaks.len(), 1);
        let s2 = spectrum(&[(1000.0, -60.0, 22.0), (1000.0, 60.0, 22.0)], 0.0);
        assert_eq!(fit_peaks_auto(&s2, &[1, 2, 4], F_TEST_THRESHOLD).unwrap().peaks.len(), 2);
    }

    #[test]
    fn rejects_empty_input() {
        let s = spectrum(&[], 0.0);
        assert!(fit_peaks(&s, 1, None).is_err());
        let s = spectrum(&[(10.0, 0.0, 5.0)], 0.0);
        assert!(fit_peaks(&s, 0, None).is_err());
    }
}
