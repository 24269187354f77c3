//! Zeeman series: per-field quadruplet fits, diamagnetic shift removal,
//! g-factor and fine-structure extraction.

use rayon::prelude::*;

use crate::units::MU_B;

use super::lm::{fit_line, fit_through_origin};
use super::peaks::{fit_peaks, fit_peaks_auto, PeakFitReport, F_TEST_THRESHOLD};
use super::spectrum::{Polarization, SpectrumData};
use super::FitError;

#[derive(Debug, Clone, PartialEq)]
pub enum ZeemanLines {
    /// Four sorted centres (μeV). When the inner pair is merged, both inner
    /// entries hold the single fitted centre.
    Quadruplet { centers: [f64; 4], sigmas: [f64; 4], merged_inner: bool },
    /// Fewer than four lines could be separated (always the case at B = 0).
    Unresolved { centers: Vec<f64>, sigmas: Vec<f64> },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeemanPoint {
    pub field: f64,
    pub lines: ZeemanLines,
}

impl ZeemanPoint {
    /// Centre of gravity of the fitted lines, with its 1σ.
    fn mean_energy(&self) -> Option<(f64, f64)> {
        let (c, s): (&[f64], &[f64]) = match &self.lines {
            ZeemanLines::Quadruplet { centers, sigmas, .. } => (centers, sigmas),
            ZeemanLines::Unresolved { centers, sigmas } if !centers.is_empty() => (centers, sigmas),
            _ => return None,
        };
        let n = c.len() as f64;
        let var: f64 = s.iter().map(|v| v * v).sum::<f64>() / (n * n);
        Some((c.iter().sum::<f64>() / n, var.sqrt()))
    }

    fn shifted(&self, by: f64) -> ZeemanPoint {
        let lines = match &self.lines {
            ZeemanLines::Quadruplet { centers, sigmas, merged_inner } => ZeemanLines::Quadruplet {
                centers: centers.map(|c| c - by),
                sigmas: *sigmas,
                merged_inner: *merged_inner,
            },
            ZeemanLines::Unresolved { centers, sigmas } => ZeemanLines::Unresolved {
                centers: centers.iter().map(|c| c - by).collect(),
                sigmas: sigmas.clone(),
            },
            ZeemanLines::Failed(m) => ZeemanLines::Failed(m.clone()),
        };
        ZeemanPoint { field: self.field, lines }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeemanSeries {
    points: Vec<ZeemanPoint>,
}

impl ZeemanSeries {
    /// Fields must be strictly increasing and every centre list sorted.
    pub fn new(points: Vec<ZeemanPoint>) -> Result<Self, FitError> {
        if points.windows(2).any(|w| !(w[1].field > w[0].field)) {
            return Err(FitError::InvalidInput("fields must be strictly increasing".into()));
        }
        for p in &points {
            let sorted = match &p.lines {
                ZeemanLines::Quadruplet { centers, .. } => centers.windows(2).all(|w| w[1] >= w[0]),
                ZeemanLines::Unresolved { centers, sigmas } => {
                    centers.len() == sigmas.len() && centers.windows(2).all(|w| w[1] >= w[0])
                }
                ZeemanLines::Failed(_) => true,
            };
            if !sorted {
                return Err(FitError::InvalidInput(format!("centres at B={} are not sorted", p.field)));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[ZeemanPoint] {
        &self.points
    }

    pub fn fields(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.field).collect()
    }
}

/// Fits every field value of the series. Spectra sharing a field are
/// analysed together: an H/V pair gives the outer and inner pairs directly,
/// a single unpolarized spectrum is fitted with 1 to 4 lines chosen by the
/// F test. A failed field is kept as [`ZeemanLines::Failed`].
pub fn fit_quadruplet_series(spectra: &[SpectrumData]) -> Result<ZeemanSeries, FitError> {
    let mut groups: Vec<(f64, Vec<&SpectrumData>)> = Vec::new();
    for s in spectra {
        s.validate()?;
        match groups.iter_mut().find(|(b, _)| *b == s.field) {
            Some((_, g)) => g.push(s),
            None => groups.push((s.field, vec![s])),
        }
    }
    if groups.len() < 3 {
        return Err(FitError::InsufficientPoints { needed: 3, got: groups.len() });
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let points = groups
        .par_iter()
        .map(|(b, g)| ZeemanPoint { field: *b, lines: fit_field(*b, g).unwrap_or_else(|e| ZeemanLines::Failed(e.to_string())) })
        .collect();
    ZeemanSeries::new(points)
}

fn pick<'a>(g: &[&'a SpectrumData], pol: Polarization) -> Option<&'a SpectrumData> {
    g.iter().copied().find(|s| s.polarization == pol)
}

fn fit_field(field: f64, g: &[&SpectrumData]) -> Result<ZeemanLines, FitError> {
    if let (Some(h), Some(v)) = (pick(g, Polarization::H), pick(g, Polarization::V)) {
        // One line per polarization at zero field.
        let candidates: &[usize] = if field == 0.0 { &[1] } else { &[1, 2] };
        let hf = fit_peaks_auto(h, candidates, F_TEST_THRESHOLD)?;
        let vf = fit_peaks_auto(v, candidates, F_TEST_THRESHOLD)?;
        if field == 0.0 || hf.peaks.len() < 2 {
            return Ok(unresolved(&[&hf, &vf]));
        }
        let (o, i) = (&hf.peaks, &vf.peaks);
        return Ok(if i.len() == 2 {
            quadruplet([o[0], i[0], i[1], o[1]].map(|p| (p.center, p.center_sigma)), false)
        } else {
            quadruplet([o[0], i[0], i[0], o[1]].map(|p| (p.center, p.center_sigma)), true)
        });
    }
    let s = pick(g, Polarization::Unpolarized).or_else(|| g.first().copied()).expect("group is never empty");
    if field == 0.0 {
        return Ok(unresolved(&[&fit_peaks_auto(s, &[1, 2], F_TEST_THRESHOLD)?]));
    }
    let f = fit_peaks_auto(s, &[1, 2, 3, 4], F_TEST_THRESHOLD)?;
    let p = &f.peaks;
    Ok(match p.len() {
        4 => quadruplet([p[0], p[1], p[2], p[3]].map(|p| (p.center, p.center_sigma)), false),
        3 => quadruplet([p[0], p[1], p[1], p[2]].map(|p| (p.center, p.center_sigma)), true),
        _ => unresolved(&[&f]),
    })
}

fn quadruplet(lines: [(f64, f64); 4], merged_inner: bool) -> ZeemanLines {
    let mut lines = lines;
    lines.sort_by(|a, b| a.0.total_cmp(&b.0));
    ZeemanLines::Quadruplet { centers: lines.map(|l| l.0), sigmas: lines.map(|l| l.1), merged_inner }
}

fn unresolved(fits: &[&PeakFitReport]) -> ZeemanLines {
    let mut lines: Vec<(f64, f64)> = fits.iter().flat_map(|f| f.peaks.iter().map(|p| (p.center, p.center_sigma))).collect();
    lines.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (centers, sigmas) = lines.into_iter().unzip();
    ZeemanLines::Unresolved { centers, sigmas }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiamagneticFit {
    /// μeV/T²
    pub kappa: f64,
    pub kappa_sigma: f64,
    /// μeV
    pub e0: f64,
    pub e0_sigma: f64,
    /// Centres with `E0 + κB²` subtracted.
    pub corrected: ZeemanSeries,
}

/// Regresses the mean line energy of each usable field on B².
pub fn remove_diamagnetic(z: &ZeemanSeries) -> Result<DiamagneticFit, FitError> {
    let (b2, mean): (Vec<f64>, Vec<f64>) =
        z.points.iter().filter_map(|p| p.mean_energy().map(|(m, _)| (p.field * p.field, m))).unzip();
    if b2.len() < 3 {
        return Err(FitError::InsufficientPoints { needed: 3, got: b2.len() });
    }
    let line = fit_line(&b2, &mean)?;
    let corrected = z.points.iter().map(|p| p.shifted(line.intercept + line.slope * p.field * p.field)).collect();
    Ok(DiamagneticFit {
        kappa: line.slope,
        kappa_sigma: line.slope_sigma,
        e0: line.intercept,
        e0_sigma: line.intercept_sigma,
        corrected: ZeemanSeries { points: corrected },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GFactorResult {
    /// g_e + g_h
    pub g_sum: f64,
    pub g_sum_sigma: f64,
    /// |g_e − g_h|
    pub g_diff: f64,
    pub g_diff_sigma: f64,
    /// ((g_sum + g_diff)/2, (g_sum − g_diff)/2). Which one is the electron
    /// cannot be decided from energies alone.
    pub assigned: (f64, f64),
    pub assignment_ambiguous: bool,
    /// Fields at which the inner pair was resolved and entered the fit.
    pub inner_points: usize,
    pub kappa: f64,
    pub kappa_sigma: f64,
    pub e0: f64,
    pub e0_sigma: f64,
}

/// Through-origin regression of the outer separation (δ_e + δ_h) and the
/// resolved inner separation |δ_e − δ_h| against μ_B·B. Inner pairs count
/// only above the highest field at which the pair is merged.
pub fn extract_g_factors(d: &DiamagneticFit) -> Result<GFactorResult, FitError> {
    let quads: Vec<(f64, [f64; 4], bool)> = d
        .corrected
        .points
        .iter()
        .filter(|p| p.field > 0.0)
        .filter_map(|p| match &p.lines {
            ZeemanLines::Quadruplet { centers, merged_inner, .. } => Some((p.field, *centers, *merged_inner)),
            _ => None,
        })
        .collect();
    if !d.corrected.points.iter().any(|p| p.field > 0.0) {
        return Err(FitError::ZeroField);
    }
    if quads.is_empty() {
        return Err(FitError::InsufficientPoints { needed: 1, got: 0 });
    }

    let xb: Vec<f64> = quads.iter().map(|q| MU_B * q.0).collect();
    let outer: Vec<f64> = quads.iter().map(|q| q.1[3] - q.1[0]).collect();
    let (g_sum, g_sum_sigma) = fit_through_origin(&xb, &outer)?;
    if g_sum < 0.0 {
        return Err(FitError::NegativeSlope { slope: g_sum * MU_B });
    }

    // The inner splitting grows with field, so a pair resolved at or below a
    // field where it is merged is a noise split and is left out.
    let merged_up_to = quads.iter().filter(|q| q.2).map(|q| q.0).fold(0.0, f64::max);
    let (xi, inner): (Vec<f64>, Vec<f64>) =
        quads.iter().filter(|q| !q.2 && q.0 > merged_up_to).map(|q| (MU_B * q.0, q.1[2] - q.1[1])).unzip();
    let (g_diff, g_diff_sigma) = if xi.is_empty() { (0.0, 0.0) } else { fit_through_origin(&xi, &inner)? };
    if g_diff < 0.0 {
        return Err(FitError::NegativeSlope { slope: g_diff * MU_B });
    }
    let g_diff = g_diff.min(g_sum);

    Ok(GFactorResult {
        g_sum,
        g_sum_sigma,
        g_diff,
        g_diff_sigma,
        assigned: (0.5 * (g_sum + g_diff), 0.5 * (g_sum - g_diff)),
        assignment_ambiguous: g_diff > 0.0,
        inner_points: xi.len(),
        kappa: d.kappa,
        kappa_sigma: d.kappa_sigma,
        e0: d.e0,
        e0_sigma: d.e0_sigma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FssResult {
    /// |centre_H − centre_V|, μeV
    pub fss: f64,
    pub sigma: f64,
    pub center_h: f64,
    pub center_v: f64,
}

/// Single-line fit per polarization at zero field.
pub fn extract_fss(h: &SpectrumData, v: &SpectrumData) -> Result<FssResult, FitError> {
    if h.field != 0.0 || v.field != 0.0 {
        return Err(FitError::InvalidInput("fine structure needs zero-field spectra".into()));
    }
    let fh = fit_peaks(h, 1, None)?.peaks[0];
    let fv = fit_peaks(v, 1, None)?.peaks[0];
    Ok(FssResult {
        fss: (fh.center - fv.center).abs(),
        sigma: fh.center_sigma.hypot(fv.center_sigma),
        center_h: fh.center,
        center_v: fv.center,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::synth::{synthesize_spectrum, Noise, SynthTruth};

    fn series(truth: SynthTruth, fields: &[f64], pols: &[Polarization]) -> Vec<SpectrumData> {
        let mut out = Vec::new();
        for &b in fields {
            for &pol in pols {
                let t = SynthTruth { field: b, polarization: pol, ..truth };
                out.push(synthesize_spectrum(&t, Noise::None, 0).unwrap());
            }
        }
        out
    }

    fn quad(field: f64, centers: [f64; 4], merged_inner: bool) -> ZeemanPoint {
        ZeemanPoint { field, lines: ZeemanLines::Quadruplet { centers, sigmas: [0.0; 4], merged_inner } }
    }

    #[test]
    fn zero_field_is_never_a_quadruplet() {
        let t = SynthTruth { fss: 1.8, g_h: 0.30, ..SynthTruth::default() };
        let z = fit_quadruplet_series(&series(t, &[0.0, 1.0, 2.0], &[Polarization::Unpolarized])).unwrap();
        assert!(matches!(z.points()[0].lines, ZeemanLines::Unresolved { .. }));
    }

    #[test]
    fn hv_pairs_give_quadruplets() {
        let t = SynthTruth { g_h: 0.30, ..SynthTruth::default() };
        let z = fit_quadruplet_series(&series(t, &[0.0, 3.0, 4.0, 5.0], &[Polarization::H, Polarization::V])).unwrap();
        for p in &z.points()[1..] {
            let ZeemanLines::Quadruplet { merged_inner, .. } = p.lines else { panic!("{p:?}") };
            assert!(!merged_inner);
        }
    }

    #[test]
    fn equal_g_merges_inner_pair() {
        let t = SynthTruth::default();
        let z = fit_quadruplet_series(&series(t, &[1.0, 2.0, 3.0, 4.0, 5.0], &[Polarization::Unpolarized])).unwrap();
        for p in z.points() {
            let ZeemanLines::Quadruplet { merged_inner, .. } = p.lines else { panic!("{p:?}") };
            assert!(merged_inner, "B={}", p.field);
        }
    }

    #[test]
    fn too_few_fields_rejected() {
        let t = SynthTruth::default();
        let r = fit_quadruplet_series(&series(t, &[4.0, 5.0], &[Polarization::Unpolarized]));
        assert!(matches!(r, Err(FitError::InsufficientPoints { .. })));
    }

    #[test]
    fn zero_kappa_leaves_centered_input() {
        let pts: Vec<ZeemanPoint> = (1..=4)
            .map(|b| {
                let o = 0.5 * MU_B * 0.68 * b as f64;
                quad(b as f64, [100.0 - o, 100.0, 100.0, 100.0 + o], true)
            })
            .collect();
        let d = remove_diamagnetic(&ZeemanSeries::new(pts).unwrap()).unwrap();
        assert!(d.kappa.abs() < 1e-9);
        assert!((d.e0 - 100.0).abs() < 1e-9);
        let ZeemanLines::Quadruplet { centers, .. } = d.corrected.points()[2].lines else { unreachable!() };
        assert!((centers[0] + centers[3]).abs() < 1e-9);
    }

    #[test]
    fn outer_separation_gives_g_sum() {
        let pts = vec![quad(5.0, [-98.4, 0.0, 0.0, 98.4], true)];
        let d = DiamagneticFit {
            kappa: 0.0,
            kappa_sigma: 0.0,
            e0: 0.0,
            e0_sigma: 0.0,
            corrected: ZeemanSeries::new(pts).unwrap(),
        };
        let g = extract_g_factors(&d).unwrap();
        assert!((g.g_sum - 0.68).abs() < 1e-3, "{}", g.g_sum);
        assert_eq!(g.g_diff, 0.0);
        assert!((g.assigned.0 - 0.34).abs() < 1e-3 && (g.assigned.1 - 0.34).abs() < 1e-3);
        assert!(!g.assignment_ambiguous);
    }

    #[test]
    fn inner_split_below_a_merged_field_is_ignored() {
        let pts = vec![
            quad(2.0, [-40.0, -3.0, 3.0, 40.0], false),
            quad(4.0, [-80.0, 0.0, 0.0, 80.0], true),
            quad(5.0, [-100.0, 0.0, 0.0, 100.0], true),
        ];
        let d = DiamagneticFit {
            kappa: 0.0,
            kappa_sigma: 0.0,
            e0: 0.0,
            e0_sigma: 0.0,
            corrected: ZeemanSeries::new(pts).unwrap(),
        };
        let g = extract_g_factors(&d).unwrap();
        assert_eq!((g.g_diff, g.inner_points), (0.0, 0));
    }

    #[test]
    fn zero_field_only_is_rejected() {
        let pts = vec![ZeemanPoint { field: 0.0, lines: ZeemanLines::Unresolved { centers: vec![0.0], sigmas: vec![0.1] } }];
        let d = DiamagneticFit {
            kappa: 0.0,
            kappa_sigma: 0.0,
            e0: 0.0,
            e0_sigma: 0.0,
            corrected: ZeemanSeries::new(pts).unwrap(),
        };
        assert_eq!(extract_g_factors(&d), Err(FitError::ZeroField));
    }

    #[test]
    fn identical_spectra_have_no_fss() {
        let t = SynthTruth { field: 0.0, polarization: Polarization::H, ..SynthTruth::default() };
        let s = synthesize_spectrum(&t, Noise::Poisson, 3).unwrap();
        let r = extract_fss(&s, &s).unwrap();
        assert_eq!(r.fss, 0.0);
        assert!(r.sigma > 0.0);
    }

    #[test]
    fn fss_recovered_noiseless() {
        let t = SynthTruth { field: 0.0, fss: 1.8, ..SynthTruth::default() };
        let h = synthesize_spectrum(&SynthTruth { polarization: Polarization::H, ..t }, Noise::None, 0).unwrap();
        let v = synthesize_spectrum(&SynthTruth { polarization: Polarization::V, ..t }, Noise::None, 0).unwrap();
        let r = extract_fss(&h, &v).unwrap();
        assert!((r.fss - 1.8).abs() < 1e-6, "{}", r.fss);
    }
}
