//! Levenberg–Marquardt least squares for scalar curve models.

use nalgebra::{DMatrix, DVector};

use super::FitError;

/// A curve `y = f(x; θ)` with an analytic gradient in θ.
pub trait CurveModel {
    fn n_params(&self) -> usize;

    /// Returns f(x; θ) and writes ∂f/∂θ into `grad`.
    fn eval(&self, x: f64, params: &[f64], grad: &mut [f64]) -> f64;

    fn value(&self, x: f64, params: &[f64]) -> f64 {
        let mut grad = vec![0.0; self.n_params()];
        self.eval(x, params, &mut grad)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative parameter step below which the fit has converged.
    pub xtol: f64,
    pub initial_lambda: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 200, xtol: 1e-10, initial_lambda: 1e-3 }
    }
}

#[derive(Debug, Clone)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// 1σ uncertainties from s²(JᵀJ)⁻¹ with s² = RSS/(m − p) (J and RSS
    /// weighted when uncertainties are supplied); infinite
    /// where JᵀJ is singular.
    pub sigma: Vec<f64>,
    pub covariance: Option<DMatrix<f64>>,
    pub rss: f64,
    pub iterations: usize,
    /// Condition number of the correlation-scaled normal matrix.
    pub condition: f64,
    pub n_points: usize,
}

impl LmFit {
    pub fn rms(&self) -> f64 {
        (self.rss / self.n_points as f64).sqrt()
    }

    pub fn dof(&self) -> usize {
        self.n_points.saturating_sub(self.params.len())
    }
}

pub fn fit_curve<M: CurveModel>(
    model: &M,
    x: &[f64],
    y: &[f64],
    initial: &[f64],
    opts: LmOptions,
) -> Result<LmFit, FitError> {
    fit_curve_weighted(model, x, y, None, initial, opts)
}

/// Minimises Σ((y − f)/σ)². With `sigma = None` every point has unit weight.
/// `rss` of the result is the weighted sum.
pub fn fit_curve_weighted<M: CurveModel>(
    model: &M,
    x: &[f64],
    y: &[f64],
    sigma: Option<&[f64]>,
    initial: &[f64],
    opts: LmOptions,
) -> Result<LmFit, FitError> {
    let n = model.n_params();
    let m = x.len();
    if y.len() != m || initial.len() != n || sigma.is_some_and(|s| s.len() != m) {
        return Err(FitError::InvalidInput("length mismatch between data and parameters".into()));
    }
    if sigma.is_some_and(|s| s.iter().any(|v| !(*v > 0.0) || !v.is_finite())) {
        return Err(FitError::InvalidInput("uncertainties must be finite and > 0".into()));
    }
    if m < n {
        return Err(FitError::InvalidInput(format!("{m} points cannot constrain {n} parameters")));
    }

    let mut params = initial.to_vec();
    let (mut jac, mut resid) = linearize(model, x, y, sigma, &params);
    let mut rss = resid.norm_squared();
    if !rss.is_finite() {
        return Err(FitError::InvalidInput("model is not finite at the initial parameters".into()));
    }
    let mut lambda = opts.initial_lambda;

    let mut iterations = 0;
    let mut converged = rss == 0.0;
    while !converged {
        if iterations >= opts.max_iter {
            return Err(FitError::NoConvergence { iterations });
        }
        iterations += 1;

        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &resid;
        let diag_floor = 1e-12 * jtj.diagonal().max().max(f64::MIN_POSITIVE);

        loop {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(diag_floor);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&jtr),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e20 {
                        converged = true;
                        break;
                    }
                    continue;
                }
            };
            let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
            let (trial_jac, trial_resid) = linearize(model, x, y, sigma, &trial);
            let trial_rss = trial_resid.norm_squared();
            if trial_rss.is_finite() && trial_rss <= rss {
                // Step size measured in the metric of JᵀJ, so parameters that
                // sit at zero do not block convergence.
                let (mut ds, mut dp) = (0.0, 0.0);
                for i in 0..n {
                    let d = jtj[(i, i)].sqrt();
                    ds += (d * step[i]).powi(2);
                    dp += (d * params[i]).powi(2);
                }
                let small = ds.sqrt() <= opts.xtol * dp.sqrt() || rss - trial_rss <= 1e-15 * rss;
                params = trial;
                jac = trial_jac;
                resid = trial_resid;
                rss = trial_rss;
                lambda = (lambda / 10.0).max(1e-15);
                if small || rss == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                // No downhill step exists at working precision: a minimum.
                converged = true;
                break;
            }
        }
    }

    let jtj = jac.transpose() * &jac;
    let condition = scaled_condition(&jtj);
    let dof = m.saturating_sub(n);
    let s2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    let covariance = jtj.clone().try_inverse().filter(|inv| inv.iter().all(|v| v.is_finite())).map(|inv| inv * s2);
    let sigma = match &covariance {
        Some(c) if condition.is_finite() => (0..n).map(|i| c[(i, i)].max(0.0).sqrt()).collect(),
        _ => vec![f64::INFINITY; n],
    };

    Ok(LmFit { params, sigma, covariance, rss, iterations, condition, n_points: m })
}

fn linearize<M: CurveModel>(
    model: &M,
    x: &[f64],
    y: &[f64],
    sigma: Option<&[f64]>,
    params: &[f64],
) -> (DMatrix<f64>, DVector<f64>) {
    let n = model.n_params();
    let mut jac = DMatrix::zeros(x.len(), n);
    let mut resid = DVector::zeros(x.len());
    let mut grad = vec![0.0; n];
    for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
        let f = model.eval(xi, params, &mut grad);
        let w = sigma.map_or(1.0, |s| 1.0 / s[i]);
        resid[i] = (yi - f) * w;
        for (j, g) in grad.iter().enumerate() {
            jac[(i, j)] = *g * w;
        }
    }
    (jac, resid)
}

fn scaled_condition(jtj: &DMatrix<f64>) -> f64 {
    let n = jtj.nrows();
    let d: Vec<f64> = (0..n).map(|i| jtj[(i, i)].sqrt()).collect();
    if d.iter().any(|&v| v == 0.0 || !v.is_finite()) {
        return f64::INFINITY;
    }
    let scaled = DMatrix::from_fn(n, n, |r, c| jtj[(r, c)] / (d[r] * d[c]));
    let sv = scaled.singular_values();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        sv.max() / min
    }
}

/// Ordinary least squares line `y = a + b·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_sigma: f64,
    pub slope_sigma: f64,
    pub rss: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit, FitError> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(FitError::InsufficientPoints { needed: 2, got: n.min(y.len()) });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FitError::InvalidInput("abscissa values are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = if n > 2 { rss / (nf - 2.0) } else { 0.0 };
    let slope_sigma = (s2 / sxx).sqrt();
    let intercept_sigma = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    Ok(LineFit { intercept, slope, intercept_sigma, slope_sigma, rss, r_squared })
}

/// Least squares slope of `y = k·x` through the origin, with its 1σ.
pub fn fit_through_origin(x: &[f64], y: &[f64]) -> Result<(f64, f64), FitError> {
    let n = x.len();
    if n != y.len() || n == 0 {
        return Err(FitError::InsufficientPoints { needed: 1, got: n.min(y.len()) });
    }
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if sxx == 0.0 {
        return Err(FitError::InvalidInput("all abscissa values are zero".into()));
    }
    let k = x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sxx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - k * a).powi(2)).sum();
    let sigma = if n > 1 { (rss / (n as f64 - 1.0) / sxx).sqrt() } else { 0.0 };
    Ok((k, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Exp;

    impl CurveModel for Exp {
        fn n_params(&self) -> usize {
            2
        }

        fn eval(&self, x: f64, p: &[f64], grad: &mut [f64]) -> f64 {
            let e = (-p[1] * x).exp();
            grad[0] = e;
            grad[1] = -p[0] * x * e;
            p[0] * e
        }
    }

    #[test]
    fn recovers_exponential() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * (-1.7 * v).exp()).collect();
        let fit = fit_curve(&Exp, &x, &y, &[1.0, 0.5], LmOptions::default()).unwrap();
        assert!((fit.params[0] - 3.0).abs() < 1e-9);
        assert!((fit.params[1] - 1.7).abs() < 1e-9);
        assert!(fit.rss < 1e-20);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * (-1.7 * v).exp()).collect();
        let opts = LmOptions { max_iter: 1, ..LmOptions::default() };
        assert!(matches!(fit_curve(&Exp, &x, &y, &[1.0, 0.5], opts), Err(FitError::NoConvergence { .. })));
    }

    #[test]
    fn line_fit_exact() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!(f.rss < 1e-24 && (f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn origin_slope() {
        let (k, s) = fit_through_origin(&[1.0, 2.0, 4.0], &[2.0, 4.0, 8.0]).unwrap();
        assert!((k - 2.0).abs() < 1e-15 && s < 1e-15);
        assert!(fit_through_origin(&[0.0, 0.0], &[1.0, 2.0]).is_err());
    }
}
