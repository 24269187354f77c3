//! Resonance versus hole g factor at 5 T: the peak is highest where the
//! electron and hole splittings coincide and one laser both pumps and
//! repumps.

use spinpump::quantum::SystemParams;
use spinpump::scan::{canonical_g_h_grid, extract_fwhm, normalize_rows, scan_with_fwhm, sweep_g_factor, ScanGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = canonical_g_h_grid();
    let sweep = sweep_g_factor(&SystemParams::canonical(), 0.34, &grid, 5.0, &ScanGrid::canonical())?;
    let norm = normalize_rows(&sweep)?;
    println!("  g_h    peak    FWHM [GHz]  unimodal");
    for (r, peak) in sweep.row_peaks().iter().enumerate().step_by(4) {
        let width = match extract_fwhm(&norm.row_profile(r)) {
            Ok(w) => w.ghz,
            Err(_) => scan_with_fwhm(&norm.row_params(r), &ScanGrid::canonical())?.1.ghz,
        };
        println!("{:.3}  {peak:.4}  {width:10.3}  {}", grid[r], norm.row_profile(r).is_unimodal());
    }
    Ok(())
}
