use crate::units::ghz_to_uev;

use super::{ResonanceProfile, ScanError};

/// Relative tolerance for flat plateaus and solver noise.
const PLATEAU_TOL: f64 = 1e-12;

/// True iff the sequence rises (non-strictly) to a single plateau and then
/// falls. Steps smaller than `1e-12 · max` are ignored. A monotone sequence
/// counts as unimodal with its peak on the boundary.
pub fn is_unimodal(values: &[f64]) -> bool {
    if values.len() < 3 {
        return false;
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = PLATEAU_TOL * max.abs();
    let mut falling = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if falling {
            if d > tol {
                return false;
            }
        } else if d < -tol {
            falling = true;
        }
    }
    true
}

/// Whether the maximum sits on the first or last sample.
pub fn peak_at_boundary(values: &[f64]) -> bool {
    match peak_index(values) {
        Some(i) => i == 0 || i + 1 == values.len(),
        None => false,
    }
}

/// Index of the maximum; for a flat top, the middle of the plateau.
pub fn peak_index(values: &[f64]) -> Option<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let tol = PLATEAU_TOL * max.abs();
    let first = values.iter().position(|&v| v >= max - tol)?;
    let last = values.iter().rposition(|&v| v >= max - tol)?;
    Some((first + last) / 2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fwhm {
    /// Left and right half-maximum crossings, GHz.
    pub left: f64,
    pub right: f64,
    pub ghz: f64,
    pub uev: f64,
}

/// Full width at half maximum from linear interpolation of the two
/// half-maximum crossings around the peak.
pub fn extract_fwhm(prof: &ResonanceProfile) -> Result<Fwhm, ScanError> {
    let (left, right) = half_max_crossings(&prof.detunings, &prof.intensities)?;
    let ghz = right - left;
    Ok(Fwhm { left, right, ghz, uev: ghz_to_uev(ghz) })
}

/// Half-maximum crossings of a sampled unimodal curve `y(x)`.
pub fn half_max_crossings(x: &[f64], y: &[f64]) -> Result<(f64, f64), ScanError> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(ScanError::InvalidGrid("profile needs at least three samples".into()));
    }
    if !is_unimodal(y) {
        return Err(ScanError::NotUnimodal);
    }
    let peak = peak_index(y).ok_or(ScanError::NotUnimodal)?;
    let half = 0.5 * y[peak];

    let left = (0..peak)
        .rev()
        .find(|&i| y[i] < half)
        .map(|i| interpolate(x[i], y[i], x[i + 1], y[i + 1], half))
        .ok_or(ScanError::HalfMaxNotBracketed)?;
    let right = (peak + 1..y.len())
        .find(|&i| y[i] < half)
        .map(|i| interpolate(x[i - 1], y[i - 1], x[i], y[i], half))
        .ok_or(ScanError::HalfMaxNotBracketed)?;
    Ok((left, right))
}

fn interpolate(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::SystemParams;
    use crate::scan::ScanGrid;

    fn profile(x: Vec<f64>, y: Vec<f64>) -> ResonanceProfile {
        ResonanceProfile { detunings: x, intensities: y, params: SystemParams::canonical() }
    }

    #[test]
    fn unimodality_cases() {
        assert!(is_unimodal(&[0.0, 1.0, 2.0, 3.0]));
        assert!(peak_at_boundary(&[0.0, 1.0, 2.0, 3.0]));
        assert!(!is_unimodal(&[0.0, 1.0, 0.5, 1.0, 0.0]));
        assert!(is_unimodal(&[0.0, 1.0, 1.0, 1.0, 0.2]));
        assert!(!peak_at_boundary(&[0.0, 1.0, 1.0, 1.0, 0.2]));
        assert!(is_unimodal(&[3.0, 2.0, 1.0]));
        // noise far below the plateau tolerance
        assert!(is_unimodal(&[0.1, 0.5, 1.0, 1.0 + 1e-14, 1.0, 0.5]));
        assert!(!is_unimodal(&[1.0, 2.0]));
    }

    #[test]
    fn lorentzian_width() {
        let hwhm = 0.3;
        let grid = ScanGrid::new(-10.0 * hwhm, 10.0 * hwhm, 601).unwrap();
        let x = grid.points();
        let y: Vec<f64> = x.iter().map(|d| hwhm * hwhm / (d * d + hwhm * hwhm)).collect();
        let w = extract_fwhm(&profile(x, y)).unwrap();
        assert!((w.ghz - 2.0 * hwhm).abs() / (2.0 * hwhm) < 1e-3, "{}", w.ghz);
    }

    #[test]
    fn triangle_width_is_exact() {
        let a = 1.3;
        let x = ScanGrid::new(-2.0, 2.0, 41).unwrap().points();
        let y: Vec<f64> = x.iter().map(|d| (1.0 - d.abs() / a).max(0.0)).collect();
        let w = extract_fwhm(&profile(x, y)).unwrap();
        assert!((w.ghz - a).abs() < 1e-12);
    }

    #[test]
    fn scale_invariance() {
        let x = ScanGrid::new(-3.0, 3.0, 121).unwrap().points();
        let y: Vec<f64> = x.iter().map(|d| 1.0 / (1.0 + d * d)).collect();
        let a = extract_fwhm(&profile(x.clone(), y.clone())).unwrap();
        let b = extract_fwhm(&profile(x, y.iter().map(|v| 37.5 * v).collect())).unwrap();
        assert!((a.ghz - b.ghz).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let x = ScanGrid::new(-1.0, 1.0, 5).unwrap().points();
        let two = profile(x.clone(), vec![0.0, 1.0, 0.5, 1.0, 0.0]);
        assert_eq!(extract_fwhm(&two), Err(ScanError::NotUnimodal));
        let wide = profile(x, vec![0.8, 0.9, 1.0, 0.9, 0.8]);
        assert_eq!(extract_fwhm(&wide), Err(ScanError::HalfMaxNotBracketed));
    }
}
