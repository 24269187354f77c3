//! Parameter sweeps over the steady-state solver: detuning scans, hole
//! g-factor sweeps and drive-power sweeps, with FWHM and unimodality checks.
//!
//! Grid points are solved in parallel and always assembled in grid order,
//! so results are bit-identical to a serial run.

mod csv;
mod fwhm;

use rayon::prelude::*;
use thiserror::Error;

use crate::quantum::{detection_intensity, SolverError, SystemParams};
use crate::units::{ghz_to_angular, ghz_to_uev, zeeman_angular};

pub use csv::{write_power_csv, write_profile_csv, write_sweep_csv};
pub use fwhm::{extract_fwhm, half_max_crossings, is_unimodal, peak_at_boundary, peak_index, Fwhm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("profile is not single peaked")]
    NotUnimodal,
    #[error("half maximum is not bracketed by the grid")]
    HalfMaxNotBracketed,
    #[error("half maximum still not bracketed after widening the grid to ±{span_ghz} GHz")]
    GridTooNarrow { span_ghz: f64 },
    #[error("row {row} has zero maximum and cannot be normalized")]
    ZeroRow { row: usize },
}

/// Uniform grid of laser detunings Δ/2π in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl ScanGrid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self, ScanError> {
        if count < 3 {
            return Err(ScanError::InvalidGrid(format!("count must be >= 3, got {count}")));
        }
        if !(stop > start) || !start.is_finite() || !stop.is_finite() {
            return Err(ScanError::InvalidGrid(format!("need start < stop, got [{start}, {stop}]")));
        }
        Ok(Self { start, stop, count })
    }

    /// 601 points over ±3 GHz.
    pub fn canonical() -> Self {
        Self { start: -3.0, stop: 3.0, count: 601 }
    }

    /// Grid points. Mirror-image points of a symmetric grid are exact negatives.
    pub fn points(&self) -> Vec<f64> {
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let (a, b) = ((self.count - 1 - i) as f64, i as f64);
                (a * self.start + b * self.stop) / n
            })
            .collect()
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.start + self.stop)
    }

    pub fn half_span(&self) -> f64 {
        0.5 * (self.stop - self.start)
    }

    fn with_half_span(&self, half: f64) -> Self {
        let c = self.center();
        Self { start: c - half, stop: c + half, count: self.count }
    }
}

/// Detected intensity ⟨Π₄⟩ against laser detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceProfile {
    /// Δ/2π in GHz.
    pub detunings: Vec<f64>,
    pub intensities: Vec<f64>,
    /// Parameters of the scan; `laser_detuning` is irrelevant here.
    pub params: SystemParams,
}

impl ResonanceProfile {
    pub fn peak(&self) -> f64 {
        self.intensities.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_unimodal(&self) -> bool {
        is_unimodal(&self.intensities)
    }
}

/// ⟨Π₄⟩ at every detuning of `grid`.
pub fn scan_detuning(p: &SystemParams, grid: &ScanGrid) -> Result<ResonanceProfile, ScanError> {
    p.validate()?;
    let detunings = grid.points();
    let intensities = detunings
        .par_iter()
        .map(|&d| detection_intensity(&p.with_detuning_ghz(d)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ResonanceProfile { detunings, intensities, params: *p })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Raw,
    RowNormalized,
}

/// Intensity map over (g_h, Δ). `intensities[row][col]` belongs to
/// `g_h[row]` and `detunings[col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult2D {
    pub g_h: Vec<f64>,
    pub detunings: Vec<f64>,
    pub intensities: Vec<Vec<f64>>,
    pub normalization: Normalization,
    pub base: SystemParams,
    pub g_e: f64,
    pub field: f64,
}

impl SweepResult2D {
    pub fn row_peaks(&self) -> Vec<f64> {
        self.intensities.iter().map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect()
    }

    /// Row `r` as a profile, with δ_h set for that row.
    pub fn row_profile(&self, r: usize) -> ResonanceProfile {
        ResonanceProfile {
            detunings: self.detunings.clone(),
            intensities: self.intensities[r].clone(),
            params: self.row_params(r),
        }
    }

    pub fn row_params(&self, r: usize) -> SystemParams {
        g_factor_params(&self.base, self.g_e, self.g_h[r], self.field)
    }
}

/// `base` with δ_e and δ_h set from the g factors at `field` tesla.
pub fn g_factor_params(base: &SystemParams, g_e: f64, g_h: f64, field: f64) -> SystemParams {
    SystemParams { delta_e: zeeman_angular(g_e, field), delta_h: zeeman_angular(g_h, field), ..*base }
}

/// Default hole g-factor axis: 41 points over [0.24, 0.44].
pub fn canonical_g_h_grid() -> Vec<f64> {
    ScanGrid { start: 0.24, stop: 0.44, count: 41 }.points()
}

/// One detuning scan per hole g factor, with δ_e fixed by `g_e` and `field`.
pub fn sweep_g_factor(
    base: &SystemParams,
    g_e: f64,
    g_h_grid: &[f64],
    field: f64,
    grid: &ScanGrid,
) -> Result<SweepResult2D, ScanError> {
    if g_h_grid.is_empty() {
        return Err(ScanError::InvalidGrid("g_h grid is empty".into()));
    }
    if !(g_e > 0.0) || !(field >= 0.0) {
        return Err(ScanError::InvalidGrid(format!("need g_e > 0 and B >= 0, got g_e={g_e}, B={field}")));
    }
    let detunings = grid.points();
    let rows: Vec<SystemParams> = g_h_grid.iter().map(|&g| g_factor_params(base, g_e, g, field)).collect();
    for p in &rows {
        p.validate()?;
    }
    let cols = detunings.len();
    let flat = (0..rows.len() * cols)
        .into_par_iter()
        .map(|k| detection_intensity(&rows[k / cols].with_detuning_ghz(detunings[k % cols])))
        .collect::<Result<Vec<_>, _>>()?;
    let intensities = flat.chunks(cols).map(<[f64]>::to_vec).collect();
    Ok(SweepResult2D {
        g_h: g_h_grid.to_vec(),
        detunings,
        intensities,
        normalization: Normalization::Raw,
        base: *base,
        g_e,
        field,
    })
}

/// Divides each row by its maximum.
pub fn normalize_rows(s: &SweepResult2D) -> Result<SweepResult2D, ScanError> {
    let mut out = s.clone();
    for (r, row) in out.intensities.iter_mut().enumerate() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(max > 0.0) {
            return Err(ScanError::ZeroRow { row: r });
        }
        row.iter_mut().for_each(|v| *v /= max);
    }
    out.normalization = Normalization::RowNormalized;
    Ok(out)
}

/// Doubling steps allowed before giving up on bracketing the half maximum.
const MAX_WIDENINGS: usize = 12;

/// Detuning scan whose grid is widened until the half maximum is bracketed
/// and the span covers at least six FWHM. Returns the final profile and width.
pub fn scan_with_fwhm(p: &SystemParams, grid: &ScanGrid) -> Result<(ResonanceProfile, Fwhm), ScanError> {
    let mut g = *grid;
    for _ in 0..=MAX_WIDENINGS {
        let prof = scan_detuning(p, &g)?;
        match extract_fwhm(&prof) {
            Ok(w) => {
                if 2.0 * g.half_span() >= 6.0 * w.ghz {
                    return Ok((prof, w));
                }
                let g2 = g.with_half_span(3.0 * w.ghz);
                let prof2 = scan_detuning(p, &g2)?;
                let w2 = extract_fwhm(&prof2)?;
                return Ok((prof2, w2));
            }
            Err(ScanError::HalfMaxNotBracketed) => g = g.with_half_span(2.0 * g.half_span()),
            Err(e) => return Err(e),
        }
    }
    Err(ScanError::GridTooNarrow { span_ghz: g.half_span() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPoint {
    /// Ω/2π in GHz.
    pub rabi_ghz: f64,
    /// Relative drive power (Ω/2π)² in GHz².
    pub power: f64,
    pub fwhm_ghz: f64,
    pub fwhm_uev: f64,
    pub peak: f64,
}

/// Power broadening and saturation: FWHM and peak ⟨Π₄⟩ for each Ω/2π (GHz).
pub fn sweep_power(base: &SystemParams, omega_grid_ghz: &[f64], grid: &ScanGrid) -> Result<Vec<PowerPoint>, ScanError> {
    if omega_grid_ghz.iter().any(|&o| !(o > 0.0)) {
        return Err(ScanError::InvalidGrid("drive strengths must be > 0".into()));
    }
    omega_grid_ghz
        .iter()
        .map(|&o| {
            let p = SystemParams { rabi: ghz_to_angular(o), ..*base };
            let (prof, w) = scan_with_fwhm(&p, grid)?;
            Ok(PowerPoint { rabi_ghz: o, power: o * o, fwhm_ghz: w.ghz, fwhm_uev: ghz_to_uev(w.ghz), peak: prof.peak() })
        })
        .collect()
}

/// Default drive axis: 20 values of Ω/2π evenly spaced over (0, 2.85] GHz.
pub fn canonical_omega_grid() -> Vec<f64> {
    (1..=20).map(|i| 2.85 * i as f64 / 20.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(ScanGrid::new(0.0, 1.0, 2).is_err());
        assert!(ScanGrid::new(1.0, 1.0, 5).is_err());
        assert!(ScanGrid::new(-1.0, 1.0, 3).is_ok());
    }

    #[test]
    fn symmetric_grid_points_mirror_exactly() {
        let pts = ScanGrid::canonical().points();
        assert_eq!(pts.len(), 601);
        assert_eq!(pts[300], 0.0);
        for i in 0..601 {
            assert_eq!(pts[i], -pts[600 - i]);
        }
        assert_eq!(pts[0], -3.0);
        assert_eq!(pts[600], 3.0);
    }

    #[test]
    fn undriven_scan_is_degenerate() {
        let p = SystemParams::canonical().with_rabi_ghz(0.0);
        let err = scan_detuning(&p, &ScanGrid::new(-1.0, 1.0, 5).unwrap()).unwrap_err();
        assert!(matches!(err, ScanError::Solver(SolverError::DegenerateSteadyState { .. })));
    }

    #[test]
    fn normalize_rejects_zero_row() {
        let s = SweepResult2D {
            g_h: vec![0.3, 0.34],
            detunings: vec![-1.0, 0.0, 1.0],
            intensities: vec![vec![0.1, 0.2, 0.1], vec![0.0, 0.0, 0.0]],
            normalization: Normalization::Raw,
            base: SystemParams::canonical(),
            g_e: 0.34,
            field: 5.0,
        };
        assert_eq!(normalize_rows(&s), Err(ScanError::ZeroRow { row: 1 }));
    }

    #[test]
    fn normalization_is_idempotent_and_scale_free() {
        let s = SweepResult2D {
            g_h: vec![0.3],
            detunings: vec![-1.0, 0.0, 1.0],
            intensities: vec![vec![0.1, 0.4, 0.2]],
            normalization: Normalization::Raw,
            base: SystemParams::canonical(),
            g_e: 0.34,
            field: 5.0,
        };
        let n1 = normalize_rows(&s).unwrap();
        assert_eq!(n1.normalization, Normalization::RowNormalized);
        assert_eq!(n1.intensities[0], vec![0.25, 1.0, 0.5]);
        assert_eq!(normalize_rows(&n1).unwrap().intensities, n1.intensities);
        let mut scaled = s.clone();
        scaled.intensities[0].iter_mut().for_each(|v| *v *= 8.0);
        assert_eq!(normalize_rows(&scaled).unwrap().intensities, n1.intensities);
    }

    #[test]
    fn power_sweep_rejects_zero_drive() {
        assert!(sweep_power(&SystemParams::canonical(), &[0.0, 1.0], &ScanGrid::canonical()).is_err());
    }
}
