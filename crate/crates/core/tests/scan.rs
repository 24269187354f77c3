use proptest::prelude::*;

use spinpump::quantum::SystemParams;
use spinpump::scan::{
    extract_fwhm, scan_detuning, scan_with_fwhm, sweep_g_factor, sweep_power, ResonanceProfile, ScanError, ScanGrid,
};

#[test]
fn scans_are_bit_identical() {
    let p = SystemParams::from_ghz(23.8, 21.0, 0.0, 1.3, 0.25);
    let g = ScanGrid::canonical();
    let a = scan_detuning(&p, &g).unwrap();
    let b = scan_detuning(&p, &g).unwrap();
    let bits = |r: &ResonanceProfile| r.intensities.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn sweep_maximum_sits_at_equal_g_factors() {
    let g_h: Vec<f64> = (0..9).map(|k| 0.30 + 0.01 * k as f64).collect();
    let s = sweep_g_factor(&SystemParams::canonical(), 0.34, &g_h, 5.0, &ScanGrid::new(-3.0, 3.0, 121).unwrap()).unwrap();
    let peaks = s.row_peaks();
    let best = (0..peaks.len()).max_by(|&a, &b| peaks[a].total_cmp(&peaks[b])).unwrap();
    assert_eq!(best, 4);
}

#[test]
fn fwhm_of_equal_splittings_never_narrows_with_drive() {
    let omegas: Vec<f64> = (1..=20).map(|i| 2.85 * i as f64 / 20.0).collect();
    let pts = sweep_power(&SystemParams::canonical(), &omegas, &ScanGrid::canonical()).unwrap();
    assert!(pts.windows(2).all(|w| w[1].fwhm_ghz >= w[0].fwhm_ghz));
}

#[test]
fn narrow_grid_is_widened() {
    let p = SystemParams::canonical().with_rabi_ghz(2.85);
    let (prof, w) = scan_with_fwhm(&p, &ScanGrid::new(-0.5, 0.5, 101).unwrap()).unwrap();
    assert!(prof.detunings[prof.detunings.len() - 1] >= 2.0 * w.ghz);
}

#[test]
fn invalid_inputs() {
    assert!(matches!(ScanGrid::new(1.0, -1.0, 10), Err(ScanError::InvalidGrid(_))));
    assert!(matches!(ScanGrid::new(-1.0, 1.0, 2), Err(ScanError::InvalidGrid(_))));
    assert!(sweep_power(&SystemParams::canonical(), &[0.0], &ScanGrid::canonical()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fwhm_ignores_scale(rabi in 0.2..2.0f64, c in 1e-3..1e3f64) {
        let prof = scan_detuning(&SystemParams::canonical().with_rabi_ghz(rabi), &ScanGrid::canonical()).unwrap();
        let scaled = ResonanceProfile { intensities: prof.intensities.iter().map(|v| v * c).collect(), ..prof.clone() };
        let (a, b) = (extract_fwhm(&prof).unwrap(), extract_fwhm(&scaled).unwrap());
        prop_assert!((a.ghz - b.ghz).abs() < 1e-9 * a.ghz);
    }

    #[test]
    fn mirror_of_splitting_difference(de in 15.0..30.0f64, dh in 15.0..30.0f64, rabi in 0.2..2.0f64) {
        let g = ScanGrid::new(-3.0, 3.0, 61).unwrap();
        let p = SystemParams::from_ghz(de, dh, 0.0, rabi, 0.25);
        let q = SystemParams::from_ghz(dh, de, 0.0, rabi, 0.25);
        let a = scan_detuning(&p, &g).unwrap();
        let b = scan_detuning(&q, &g).unwrap();
        for (x, y) in a.intensities.iter().zip(b.intensities.iter().rev()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}
