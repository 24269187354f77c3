//! Physical constants and unit conversions.
//!
//! Energies are in μeV, frequencies in GHz (ordinary, not angular), wavelengths
//! in nm and magnetic fields in tesla. The simulation itself runs on angular
//! frequencies in rad/ns, so `2π · f[GHz]` is the stored value.

use std::f64::consts::TAU;

/// Bohr magneton, μeV/T.
pub const MU_B: f64 = 57.883_818_060;
/// Planck constant, μeV·ns. One GHz corresponds to this many μeV.
pub const PLANCK: f64 = 4.135_667_696;
/// h·c, μeV·nm.
pub const HC: f64 = 1_239_841_984.0;

/// Zeeman splitting `μ_B · g · B` in μeV.
pub fn zeeman_splitting(g: f64, field: f64) -> f64 {
    MU_B * g * field
}

pub fn uev_to_ghz(energy: f64) -> f64 {
    energy / PLANCK
}

pub fn ghz_to_uev(freq: f64) -> f64 {
    freq * PLANCK
}

/// Photon energy (μeV) of a vacuum wavelength (nm).
pub fn nm_to_uev(wavelength: f64) -> f64 {
    HC / wavelength
}

pub fn uev_to_nm(energy: f64) -> f64 {
    HC / energy
}

/// `f/2π` in GHz to angular frequency in rad/ns.
pub fn ghz_to_angular(freq: f64) -> f64 {
    TAU * freq
}

pub fn angular_to_ghz(omega: f64) -> f64 {
    omega / TAU
}

/// Zeeman splitting as an angular frequency in rad/ns.
pub fn zeeman_angular(g: f64, field: f64) -> f64 {
    ghz_to_angular(uev_to_ghz(zeeman_splitting(g, field)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_g_gives_zero_splitting() {
        assert_eq!(zeeman_splitting(0.0, 5.0), 0.0);
    }

    #[test]
    fn max_field_splitting_matches_simulation_frequency() {
        let e = zeeman_splitting(0.34, 5.0);
        assert!((e - 98.40).abs() < 0.005, "{e}");
        let f = uev_to_ghz(e);
        assert!((f - 23.79).abs() < 0.005, "{f}");
        assert!((f - 23.8).abs() / 23.8 < 5e-3);
    }

    #[test]
    fn splitting_is_linear_in_field() {
        let e = zeeman_splitting(0.34, 2.5);
        assert!((e - 49.20).abs() < 0.005, "{e}");
        assert_relative_eq!(2.0 * e, zeeman_splitting(0.34, 5.0), max_relative = 1e-15);
    }

    #[test]
    fn conversions_round_trip() {
        for x in [1e-3, 0.25, 23.8, 1.0e4] {
            assert_relative_eq!(uev_to_ghz(ghz_to_uev(x)), x, max_relative = 1e-9);
            assert_relative_eq!(angular_to_ghz(ghz_to_angular(x)), x, max_relative = 1e-9);
        }
        for nm in [780.0, 890.0, 890.014] {
            assert_relative_eq!(uev_to_nm(nm_to_uev(nm)), nm, max_relative = 1e-9);
        }
        // 0.014 nm at 890 nm is roughly the 22 μeV line width.
        let w = nm_to_uev(890.0 - 0.007) - nm_to_uev(890.0 + 0.007);
        assert!((w - 21.9).abs() < 0.2, "{w}");
    }
}
