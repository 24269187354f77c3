use super::lm::CurveModel;

/// Unit-peak Lorentzian with full width at half maximum `fwhm`.
pub fn lorentzian(x: f64, center: f64, fwhm: f64) -> f64 {
    let u = 2.0 * (x - center) / fwhm;
    1.0 / (1.0 + u * u)
}

/// Value of the unit-peak Lorentzian and its partials in (center, fwhm).
fn lorentzian_grad(x: f64, center: f64, fwhm: f64) -> (f64, f64, f64) {
    let d = x - center;
    let u = 2.0 * d / fwhm;
    let l = 1.0 / (1.0 + u * u);
    let l2 = l * l;
    // ∂L/∂c = 2u·(2/w)·L², ∂L/∂w = 2u²/w·L²
    let d_center = 4.0 * u / fwhm * l2;
    let d_width = 2.0 * u * u / fwhm * l2;
    (l, d_center, d_width)
}

/// `bg + Σ_k A_k · L(x; c_k, w_k)` with parameters
/// `[bg, A_1, c_1, w_1, A_2, c_2, w_2, ...]`. Widths enter through |w|.
#[derive(Debug, Clone, Copy)]
pub struct LorentzianSum {
    pub n_peaks: usize,
}

impl CurveModel for LorentzianSum {
    fn n_params(&self) -> usize {
        1 + 3 * self.n_peaks
    }

    fn eval(&self, x: f64, p: &[f64], grad: &mut [f64]) -> f64 {
        let mut y = p[0];
        grad[0] = 1.0;
        for k in 0..self.n_peaks {
            let (a, c, w) = (p[1 + 3 * k], p[2 + 3 * k], p[3 + 3 * k]);
            let (l, dc, dw) = lorentzian_grad(x, c, w.abs());
            y += a * l;
            grad[1 + 3 * k] = l;
            grad[2 + 3 * k] = a * dc;
            grad[3 + 3 * k] = a * dw * w.signum();
        }
        y
    }
}

/// `A · L(x − s/2; w) · L(x + s/2; w)` with `s` fixed and parameters `[A, w]`.
#[derive(Debug, Clone, Copy)]
pub struct DisplacedProduct {
    pub splitting: f64,
}

impl CurveModel for DisplacedProduct {
    fn n_params(&self) -> usize {
        2
    }

    fn eval(&self, x: f64, p: &[f64], grad: &mut [f64]) -> f64 {
        let (a, w) = (p[0], p[1]);
        let h = 0.5 * self.splitting;
        let (l1, _, dw1) = lorentzian_grad(x, h, w.abs());
        let (l2, _, dw2) = lorentzian_grad(x, -h, w.abs());
        grad[0] = l1 * l2;
        grad[1] = a * (dw1 * l2 + l1 * dw2) * w.signum();
        a * l1 * l2
    }
}

/// `A₁ · L(x − s/2; w) + A₂ · L(x + s/2; w)` with `s` fixed and parameters
/// `[A₁, A₂, w]`.
#[derive(Debug, Clone, Copy)]
pub struct DisplacedSum {
    pub splitting: f64,
}

impl CurveModel for DisplacedSum {
    fn n_params(&self) -> usize {
        3
    }

    fn eval(&self, x: f64, p: &[f64], grad: &mut [f64]) -> f64 {
        let (a1, a2, w) = (p[0], p[1], p[2]);
        let h = 0.5 * self.splitting;
        let (l1, _, dw1) = lorentzian_grad(x, h, w.abs());
        let (l2, _, dw2) = lorentzian_grad(x, -h, w.abs());
        grad[0] = l1;
        grad[1] = l2;
        grad[2] = (a1 * dw1 + a2 * dw2) * w.signum();
        a1 * l1 + a2 * l2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_gradient<M: CurveModel>(model: &M, params: &[f64], xs: &[f64]) {
        let mut grad = vec![0.0; model.n_params()];
        for &x in xs {
            model.eval(x, params, &mut grad);
            for j in 0..params.len() {
                let h = 1e-6 * params[j].abs().max(1e-3);
                let mut up = params.to_vec();
                let mut dn = params.to_vec();
                up[j] += h;
                dn[j] -= h;
                let fd = (model.value(x, &up) - model.value(x, &dn)) / (2.0 * h);
                assert!((fd - grad[j]).abs() <= 1e-6 * fd.abs().max(1.0), "param {j} at x={x}: {fd} vs {}", grad[j]);
            }
        }
    }

    #[test]
    fn half_maximum_at_half_width() {
        assert_eq!(lorentzian(3.0, 3.0, 2.0), 1.0);
        assert!((lorentzian(4.0, 3.0, 2.0) - 0.5).abs() < 1e-15);
        assert!((lorentzian(2.0, 3.0, 2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let xs = [-30.0, -5.0, -0.3, 0.0, 1.1, 12.0];
        check_gradient(&LorentzianSum { n_peaks: 2 }, &[5.0, 100.0, -2.0, 20.0, 50.0, 7.0, 15.0], &xs);
        check_gradient(&DisplacedProduct { splitting: 2.8 }, &[0.2, 2.5], &xs);
        check_gradient(&DisplacedSum { splitting: 2.8 }, &[0.1, 0.07, 2.5], &xs);
    }
}
