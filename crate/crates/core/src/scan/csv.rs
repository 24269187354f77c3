use std::io::{self, Write};

use crate::quantum::SystemParams;
use crate::units::angular_to_ghz;

use super::{Normalization, PowerPoint, ResonanceProfile, SweepResult2D};

fn write_params<W: Write>(out: &mut W, p: &SystemParams) -> io::Result<()> {
    writeln!(out, "# delta_e_ghz={}", angular_to_ghz(p.delta_e))?;
    writeln!(out, "# delta_h_ghz={}", angular_to_ghz(p.delta_h))?;
    writeln!(out, "# rabi_ghz={}", p.rabi_ghz())?;
    writeln!(out, "# gamma_ghz={}", p.gamma_ghz())?;
    match p.t1_spin {
        Some(t1) => writeln!(out, "# t1_ns={t1}"),
        None => writeln!(out, "# t1_ns=inf"),
    }
}

/// `detuning_ghz,intensity`, one row per grid point.
pub fn write_profile_csv<W: Write>(out: &mut W, prof: &ResonanceProfile) -> io::Result<()> {
    write_params(out, &prof.params)?;
    writeln!(out, "detuning_ghz,intensity")?;
    for (d, i) in prof.detunings.iter().zip(&prof.intensities) {
        writeln!(out, "{d},{i}")?;
    }
    Ok(())
}

/// Long format `g_h,detuning_ghz,intensity`, rows in (g_h, Δ) order.
pub fn write_sweep_csv<W: Write>(out: &mut W, s: &SweepResult2D) -> io::Result<()> {
    write_params(out, &s.base)?;
    writeln!(out, "# g_e={}", s.g_e)?;
    writeln!(out, "# field_t={}", s.field)?;
    let norm = match s.normalization {
        Normalization::Raw => "raw",
        Normalization::RowNormalized => "row",
    };
    writeln!(out, "# normalization={norm}")?;
    writeln!(out, "g_h,detuning_ghz,intensity")?;
    for (g, row) in s.g_h.iter().zip(&s.intensities) {
        for (d, i) in s.detunings.iter().zip(row) {
            writeln!(out, "{g},{d},{i}")?;
        }
    }
    Ok(())
}

pub fn write_power_csv<W: Write>(out: &mut W, base: &SystemParams, points: &[PowerPoint]) -> io::Result<()> {
    write_params(out, base)?;
    writeln!(out, "omega_ghz,power_rel,fwhm_ghz,fwhm_uev,peak")?;
    for p in points {
        writeln!(out, "{},{},{},{},{}", p.rabi_ghz, p.power, p.fwhm_ghz, p.fwhm_uev, p.peak)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_layout() {
        let prof = ResonanceProfile {
            detunings: vec![-1.0, 0.0, 1.0],
            intensities: vec![0.1, 0.25, 0.1],
            params: SystemParams::canonical(),
        };
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &prof).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, ["detuning_ghz,intensity", "-1,0.1", "0,0.25", "1,0.1"]);
    }
}
