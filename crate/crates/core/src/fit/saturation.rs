//! Saturation `I = I_max·P/(P + P_sat)` and power-broadening fits.
//!
//! The saturation curve is fitted as `I = a·P/(1 + b·P)` so that data far
//! below saturation (b → 0) stays a well-posed problem; `I_max = a/b` and
//! `P_sat = 1/b` follow.

use super::lm::{fit_curve, fit_line, CurveModel, LineFit, LmOptions};
use super::FitError;

const MIN_POINTS: usize = 4;

struct Saturation;

impl CurveModel for Saturation {
    fn n_params(&self) -> usize {
        2
    }

    fn eval(&self, p: f64, q: &[f64], grad: &mut [f64]) -> f64 {
        let (a, b) = (q[0], q[1]);
        let d = 1.0 + b * p;
        grad[0] = p / d;
        grad[1] = -a * p * p / (d * d);
        a * p / d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationFit {
    pub i_max: f64,
    pub i_max_sigma: f64,
    pub p_sat: f64,
    pub p_sat_sigma: f64,
    /// Initial slope `I_max/P_sat`.
    pub slope: f64,
    pub residual_norm: f64,
    /// RMS residual.
    pub rms: f64,
    /// The data do not bound P_sat from above: either the fitted curvature is
    /// not positive or it is smaller than its own 1σ.
    pub unbounded: bool,
}

impl SaturationFit {
    pub fn value(&self, p: f64) -> f64 {
        if self.p_sat.is_finite() {
            self.i_max * p / (p + self.p_sat)
        } else {
            self.slope * p
        }
    }
}

fn check_pairs(x: &[f64], y: &[f64], allow_zero: bool) -> Result<(), FitError> {
    if x.len() != y.len() {
        return Err(FitError::InvalidInput("powers and values differ in length".into()));
    }
    if x.len() < MIN_POINTS {
        return Err(FitError::InsufficientPoints { needed: MIN_POINTS, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(FitError::InvalidInput("non-finite input".into()));
    }
    if x.iter().any(|&p| p < 0.0 || (p == 0.0 && !allow_zero)) {
        let bound = if allow_zero { ">= 0" } else { "> 0" };
        return Err(FitError::InvalidInput(format!("powers must be {bound}")));
    }
    Ok(())
}

pub fn fit_saturation(powers: &[f64], intensities: &[f64]) -> Result<SaturationFit, FitError> {
    check_pairs(powers, intensities, false)?;
    // Hanes–Woolf linearisation P/I = 1/a + (b/a)·P for the starting point.
    let hw = if intensities.iter().all(|&i| i > 0.0) {
        let ratio: Vec<f64> = powers.iter().zip(intensities).map(|(p, i)| p / i).collect();
        fit_line(powers, &ratio).ok()
    } else {
        None
    };
    let init = match hw {
        Some(l) if l.intercept > 0.0 && l.slope >= 0.0 => [1.0 / l.intercept, l.slope / l.intercept],
        _ => {
            let pmax = powers.iter().copied().fold(0.0, f64::max);
            let imax = intensities.iter().copied().fold(0.0, f64::max);
            [2.0 * imax / pmax, 1.0 / pmax]
        }
    };
    let fit = fit_curve(&Saturation, powers, intensities, &init, LmOptions::default())?;
    let (a, b) = (fit.params[0], fit.params[1]);
    let (sa, sb) = (fit.sigma[0], fit.sigma[1]);
    let unbounded = !(b > 0.0) || !(sb < b);
    let (i_max, i_max_sigma, p_sat, p_sat_sigma) = if b > 0.0 {
        let cov_ab = fit.covariance.as_ref().map_or(0.0, |c| c[(0, 1)]);
        // Linear error propagation for a/b and 1/b.
        let var_imax = (sa / b).powi(2) + (a * sb / (b * b)).powi(2) - 2.0 * a / (b * b * b) * cov_ab;
        (a / b, var_imax.max(0.0).sqrt(), 1.0 / b, sb / (b * b))
    } else {
        (f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY)
    };
    Ok(SaturationFit {
        i_max,
        i_max_sigma,
        p_sat,
        p_sat_sigma,
        slope: a,
        residual_norm: fit.rss.sqrt(),
        rms: fit.rms(),
        unbounded,
    })
}

/// `w = w0·√(1 + P/P_sat)`, fitted as `w = √(α + β·P)`.
struct SqrtBroadening;

impl CurveModel for SqrtBroadening {
    fn n_params(&self) -> usize {
        2
    }

    fn eval(&self, p: f64, q: &[f64], grad: &mut [f64]) -> f64 {
        let w = (q[0] + q[1] * p).max(f64::MIN_POSITIVE).sqrt();
        grad[0] = 0.5 / w;
        grad[1] = 0.5 * p / w;
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtFit {
    pub w0: f64,
    pub w0_sigma: f64,
    pub p_sat: f64,
    pub p_sat_sigma: f64,
    pub rss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BroadeningModel {
    Linear,
    SquareRoot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadeningFit {
    /// `w = intercept + slope·P`
    pub linear: LineFit,
    pub sqrt: SqrtFit,
    pub preferred: BroadeningModel,
}

pub fn fit_power_broadening(powers: &[f64], widths: &[f64]) -> Result<BroadeningFit, FitError> {
    check_pairs(powers, widths, true)?;
    let linear = fit_line(powers, widths)?;
    let sq: Vec<f64> = widths.iter().map(|w| w * w).collect();
    let guess = fit_line(powers, &sq)?;
    let init = [guess.intercept.max(1e-3 * sq[0]), guess.slope.max(1e-9)];
    let fit = fit_curve(&SqrtBroadening, powers, widths, &init, LmOptions::default())?;
    let (alpha, beta) = (fit.params[0], fit.params[1]);
    let (sa, sb) = (fit.sigma[0], fit.sigma[1]);
    if !(alpha > 0.0) {
        return Err(FitError::InvalidInput("square-root model has no positive zero-power width".into()));
    }
    let w0 = alpha.sqrt();
    let p_sat = alpha / beta;
    let cov_ab = fit.covariance.as_ref().map_or(0.0, |c| c[(0, 1)]);
    let var_psat = (sa / beta).powi(2) + (alpha * sb / (beta * beta)).powi(2) - 2.0 * alpha / beta.powi(3) * cov_ab;
    let sqrt = SqrtFit { w0, w0_sigma: 0.5 * sa / w0, p_sat, p_sat_sigma: var_psat.max(0.0).sqrt(), rss: fit.rss };
    let preferred = if linear.rss <= fit.rss { BroadeningModel::Linear } else { BroadeningModel::SquareRoot };
    Ok(BroadeningFit { linear, sqrt, preferred })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn powers() -> Vec<f64> {
        (1..=12).map(|i| 0.25 * i as f64).collect()
    }

    #[test]
    fn exact_saturation_recovered() {
        let p = powers();
        let i: Vec<f64> = p.iter().map(|p| 1000.0 * p / (p + 1.0)).collect();
        let f = fit_saturation(&p, &i).unwrap();
        assert!((f.i_max - 1000.0).abs() / 1000.0 < 1e-6, "{}", f.i_max);
        assert!((f.p_sat - 1.0).abs() < 1e-6, "{}", f.p_sat);
        assert!(f.residual_norm < 1e-8 * 1000.0);
        assert!(!f.unbounded);
    }

    #[test]
    fn linear_data_is_unbounded() {
        let p = powers();
        let i: Vec<f64> = p.iter().map(|p| 40.0 * p).collect();
        let f = fit_saturation(&p, &i).unwrap();
        assert!(f.unbounded);
        assert!((f.slope - 40.0).abs() < 1e-6);
    }

    #[test]
    fn saturation_needs_four_positive_powers() {
        assert!(matches!(fit_saturation(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), Err(FitError::InsufficientPoints { .. })));
        assert!(fit_saturation(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn exact_linear_broadening() {
        let p = powers();
        let w: Vec<f64> = p.iter().map(|p| 11.0 + 2.5 * p).collect();
        let f = fit_power_broadening(&p, &w).unwrap();
        assert!(f.linear.rss < 1e-20);
        assert_eq!(f.preferred, BroadeningModel::Linear);
    }

    #[test]
    fn exact_sqrt_broadening() {
        let p = powers();
        let w: Vec<f64> = p.iter().map(|p| 11.0 * (1.0 + p / 0.7).sqrt()).collect();
        let f = fit_power_broadening(&p, &w).unwrap();
        assert!((f.sqrt.w0 - 11.0).abs() < 1e-6 && (f.sqrt.p_sat - 0.7).abs() < 1e-6);
        assert!(f.sqrt.rss < 1e-8 * 11.0 * 11.0);
        assert_eq!(f.preferred, BroadeningModel::SquareRoot);
    }

    #[test]
    fn endpoint_broadening_is_finite() {
        let p: Vec<f64> = (0..6).map(|k| 0.1 * 100f64.powf(k as f64 / 5.0)).collect();
        let w: Vec<f64> = p.iter().map(|p| 11.5 + (36.0 - 11.5) * (p - 0.1) / 9.9).collect();
        let f = fit_power_broadening(&p, &w).unwrap();
        for v in [f.linear.slope, f.linear.intercept, f.sqrt.w0, f.sqrt.p_sat] {
            assert!(v.is_finite());
        }
    }
}
