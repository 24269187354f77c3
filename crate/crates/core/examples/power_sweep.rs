//! Power broadening and saturation of the resonance, and the effect of a
//! finite ground-state spin lifetime.

use spinpump::fit::saturation::{fit_power_broadening, fit_saturation};
use spinpump::quantum::SystemParams;
use spinpump::scan::{canonical_omega_grid, sweep_power, ScanGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = SystemParams::canonical();
    let omegas = canonical_omega_grid();
    let pts = sweep_power(&base, &omegas, &ScanGrid::canonical())?;
    println!("Ω/2π [GHz]  FWHM [μeV]  peak");
    for p in &pts {
        println!("{:10.3}  {:10.2}  {:.4}", p.rabi_ghz, p.fwhm_uev, p.peak);
    }

    let power: Vec<f64> = pts.iter().map(|p| p.power).collect();
    let peak: Vec<f64> = pts.iter().map(|p| p.peak).collect();
    let width: Vec<f64> = pts.iter().map(|p| p.fwhm_ghz).collect();
    let sat = fit_saturation(&power, &peak)?;
    println!("saturation: I_max = {:.4}, P_sat = {:.4} GHz²", sat.i_max, sat.p_sat);
    let b = fit_power_broadening(&power, &width)?;
    println!("broadening: w0 = {:.4} GHz, preferred model {:?}", b.sqrt.w0, b.preferred);

    for t1 in [1000.0, 1.0 / base.gamma] {
        let slow = sweep_power(&base.with_t1(Some(t1)), &omegas, &ScanGrid::canonical())?;
        let worst = slow.iter().zip(&pts).map(|(a, b)| ((a.peak - b.peak) / b.peak).abs()).fold(0.0, f64::max);
        println!("T1 = {t1:8.3} ns: largest change of the peak {:.3}%", 100.0 * worst);
    }
    Ok(())
}
