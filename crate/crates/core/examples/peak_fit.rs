//! Multi-Lorentzian fit of one spectrum with automatic choice of the number
//! of lines.

use spinpump::fit::peaks::{fit_peaks_auto, F_TEST_THRESHOLD};
use spinpump::fit::spectrum::Polarization;
use spinpump::fit::synth::{synthesize_spectrum, Noise, SynthTruth};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for g_h in [0.34, 0.24] {
        let t = SynthTruth { g_h, field: 5.0, polarization: Polarization::Unpolarized, ..SynthTruth::default() };
        let s = synthesize_spectrum(&t, Noise::Poisson, 3)?;
        let fit = fit_peaks_auto(&s, &[1, 2, 3, 4], F_TEST_THRESHOLD)?;
        println!("g_h = {g_h}: {} lines, χ² = {:.1} for {} points", fit.peaks.len(), fit.rss, fit.n_points);
        for p in &fit.peaks {
            println!("  {:.2} ± {:.2} μeV, FWHM {:.1}, {:.0} counts", p.center, p.center_sigma, p.fwhm, p.amplitude);
        }
    }
    Ok(())
}
