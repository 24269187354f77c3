//! Synthetic magneto-photoluminescence spectra written as CSV.

use spinpump::fit::spectrum::Polarization;
use spinpump::fit::synth::{amplitude_for_snr, synthesize_spectrum, Noise, SynthTruth};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let amp = amplitude_for_snr(30.0);
    let truth = SynthTruth { g_h: 0.30, outer_amplitude: amp, inner_amplitude: amp, ..SynthTruth::default() };
    for pol in [Polarization::H, Polarization::V, Polarization::Unpolarized] {
        println!("{pol} lines at 5 T: {:?}", SynthTruth { polarization: pol, ..truth }.visible_lines());
    }
    let dir = std::env::temp_dir().join("spinpump_synth");
    std::fs::create_dir_all(&dir)?;
    for b in 0..=5 {
        let t = SynthTruth { field: b as f64, polarization: Polarization::Unpolarized, ..truth };
        let s = synthesize_spectrum(&t, Noise::Poisson, 7 + b)?;
        let path = dir.join(format!("B{b}.csv"));
        std::fs::write(&path, s.to_csv_string())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
