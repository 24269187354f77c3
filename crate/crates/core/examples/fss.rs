//! Fine-structure splitting from zero-field H and V spectra.

use spinpump::fit::spectrum::Polarization;
use spinpump::fit::synth::{synthesize_spectrum, Noise, SynthTruth};
use spinpump::fit::zeeman::extract_fss;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = SynthTruth { field: 0.0, fss: 1.8, linewidth: 22.0, ..SynthTruth::default() };
    for seed in 0..5 {
        let h = synthesize_spectrum(&SynthTruth { polarization: Polarization::H, ..t }, Noise::Poisson, 2 * seed)?;
        let v = synthesize_spectrum(&SynthTruth { polarization: Polarization::V, ..t }, Noise::Poisson, 2 * seed + 1)?;
        let r = extract_fss(&h, &v)?;
        println!("seed {seed}: FSS = {:.3} ± {:.3} μeV", r.fss, r.sigma);
    }
    Ok(())
}
