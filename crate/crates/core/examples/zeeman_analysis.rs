//! Field series of spectra to diamagnetic coefficient and g factors.

use spinpump::fit::spectrum::Polarization;
use spinpump::fit::synth::{amplitude_for_snr, synthesize_spectrum, Noise, SynthTruth};
use spinpump::fit::zeeman::{extract_g_factors, fit_quadruplet_series, remove_diamagnetic, ZeemanLines};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let amp = amplitude_for_snr(30.0);
    let truth = SynthTruth { g_h: 0.30, outer_amplitude: amp, inner_amplitude: amp, ..SynthTruth::default() };
    let mut spectra = Vec::new();
    for b in 0..=5u64 {
        for (k, pol) in [Polarization::H, Polarization::V].into_iter().enumerate() {
            let t = SynthTruth { field: b as f64, polarization: pol, ..truth };
            spectra.push(synthesize_spectrum(&t, Noise::Poisson, 100 * b + k as u64)?);
        }
    }

    let series = fit_quadruplet_series(&spectra)?;
    let dia = remove_diamagnetic(&series)?;
    for p in dia.corrected.points() {
        if let ZeemanLines::Quadruplet { centers, merged_inner, .. } = &p.lines {
            println!("B = {} T: {:?}{}", p.field, centers.map(|c| (c * 100.0).round() / 100.0), if *merged_inner { " (inner merged)" } else { "" });
        }
    }
    let g = extract_g_factors(&dia)?;
    println!("κ = {:.3} ± {:.3} μeV/T²", g.kappa, g.kappa_sigma);
    println!("g_e + g_h = {:.4} ± {:.4}", g.g_sum, g.g_sum_sigma);
    println!("|g_e − g_h| = {:.4} ± {:.4} from {} fields", g.g_diff, g.g_diff_sigma, g.inner_points);
    println!("g factors {:.3} and {:.3} (assignment ambiguous: {})", g.assigned.0, g.assigned.1, g.assignment_ambiguous);
    Ok(())
}
