//! Detected population ⟨Π₄⟩ across the laser detuning, with its FWHM.

use spinpump::quantum::SystemParams;
use spinpump::scan::{scan_with_fwhm, ScanGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = SystemParams::canonical();
    let (prof, w) = scan_with_fwhm(&p, &ScanGrid::canonical())?;
    println!("peak ⟨Π₄⟩ = {:.4}", prof.peak());
    println!("FWHM = {:.3} GHz = {:.2} μeV (crossings {:.3}, {:.3})", w.ghz, w.uev, w.left, w.right);
    for (d, i) in prof.detunings.iter().zip(&prof.intensities).step_by(50) {
        println!("{d:>7.2} GHz  {i:.5}  {}", "#".repeat((i * 200.0) as usize));
    }
    Ok(())
}
