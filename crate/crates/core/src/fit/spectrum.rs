//! Photoluminescence spectra and their CSV form.
//!
//! ```text
//! # B=5
//! # pol=H
//! # P=2
//! uev,counts
//! 1393000,12
//! ...
//! ```
//!
//! The first header column names the abscissa unit (`uev` or `nm`).
//! Metadata lines are optional; other `#` lines are ignored.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use crate::units::nm_to_uev;

use super::FitError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    H,
    V,
    Unpolarized,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
            Polarization::Unpolarized => "U",
        })
    }
}

impl FromStr for Polarization {
    type Err = FitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "H" | "h" => Ok(Polarization::H),
            "V" | "v" => Ok(Polarization::V),
            "U" | "u" => Ok(Polarization::Unpolarized),
            other => Err(FitError::InvalidInput(format!("unknown polarization '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbscissaUnit {
    MicroEv,
    Nanometer,
}

impl AbscissaUnit {
    pub fn tag(&self) -> &'static str {
        match self {
            AbscissaUnit::MicroEv => "uev",
            AbscissaUnit::Nanometer => "nm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumData {
    /// Strictly monotone photon energy (μeV) or wavelength (nm).
    pub abscissa: Vec<f64>,
    pub unit: AbscissaUnit,
    pub counts: Vec<f64>,
    pub polarization: Polarization,
    /// Magnetic field in tesla.
    pub field: f64,
    /// Excitation power in μW.
    pub power: Option<f64>,
}

impl SpectrumData {
    pub fn new(
        abscissa: Vec<f64>,
        unit: AbscissaUnit,
        counts: Vec<f64>,
        polarization: Polarization,
        field: f64,
    ) -> Result<Self, FitError> {
        let s = Self { abscissa, unit, counts, polarization, field, power: None };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), FitError> {
        if self.abscissa.len() != self.counts.len() {
            return Err(FitError::InvalidInput("abscissa and counts differ in length".into()));
        }
        if self.abscissa.len() < 2 {
            return Err(FitError::InsufficientPoints { needed: 2, got: self.abscissa.len() });
        }
        let inc = self.abscissa.windows(2).all(|w| w[1] > w[0]);
        let dec = self.abscissa.windows(2).all(|w| w[1] < w[0]);
        if !(inc || dec) {
            return Err(FitError::InvalidInput("abscissa is not strictly monotone".into()));
        }
        if self.counts.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
            return Err(FitError::InvalidInput("counts must be finite and non-negative".into()));
        }
        if !self.field.is_finite() || self.field < 0.0 {
            return Err(FitError::InvalidInput(format!("invalid field {}", self.field)));
        }
        Ok(())
    }

    /// (energy μeV ascending, counts) regardless of the stored unit.
    pub fn energy_series(&self) -> (Vec<f64>, Vec<f64>) {
        let mut pairs: Vec<(f64, f64)> = match self.unit {
            AbscissaUnit::MicroEv => self.abscissa.iter().copied().zip(self.counts.iter().copied()).collect(),
            AbscissaUnit::Nanometer => {
                self.abscissa.iter().map(|&nm| nm_to_uev(nm)).zip(self.counts.iter().copied()).collect()
            }
        };
        if pairs.len() > 1 && pairs[0].0 > pairs[1].0 {
            pairs.reverse();
        }
        pairs.into_iter().unzip()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "# B={}", self.field)?;
        writeln!(out, "# pol={}", self.polarization)?;
        if let Some(p) = self.power {
            writeln!(out, "# P={p}")?;
        }
        writeln!(out, "{},counts", self.unit.tag())?;
        for (x, c) in self.abscissa.iter().zip(&self.counts) {
            writeln!(out, "{x},{c}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, FitError> {
        let mut field = 0.0;
        let mut polarization = Polarization::Unpolarized;
        let mut power = None;
        let mut unit = None;
        let mut abscissa = Vec::new();
        let mut counts = Vec::new();

        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| FitError::InvalidInput(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| FitError::InvalidInput(format!("line {}: {what}", lineno + 1));
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((key, value)) = meta.trim().split_once('=') {
                    match key.trim() {
                        "B" => field = value.trim().parse().map_err(|_| bad("bad B value"))?,
                        "pol" => polarization = value.parse()?,
                        "P" => power = Some(value.trim().parse().map_err(|_| bad("bad P value"))?),
                        _ => {}
                    }
                }
                continue;
            }
            if unit.is_none() {
                let first = line.split(',').next().unwrap_or("").trim();
                unit = Some(match first {
                    "uev" => AbscissaUnit::MicroEv,
                    "nm" => AbscissaUnit::Nanometer,
                    _ => return Err(bad("header must start with 'uev' or 'nm'")),
                });
                continue;
            }
            let mut cols = line.split(',');
            let x: f64 = cols.next().and_then(|v| v.trim().parse().ok()).ok_or_else(|| bad("bad abscissa"))?;
            let c: f64 = cols.next().and_then(|v| v.trim().parse().ok()).ok_or_else(|| bad("bad counts"))?;
            abscissa.push(x);
            counts.push(c);
        }

        let unit = unit.ok_or_else(|| FitError::InvalidInput("missing header row".into()))?;
        let s = Self { abscissa, unit, counts, polarization, field, power };
        s.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_monotone_and_negative() {
        let ok = SpectrumData::new(vec![1.0, 2.0, 3.0], AbscissaUnit::MicroEv, vec![0.0, 1.0, 2.0], Polarization::H, 0.0);
        assert!(ok.is_ok());
        assert!(SpectrumData::new(vec![1.0, 3.0, 2.0], AbscissaUnit::MicroEv, vec![0.0; 3], Polarization::H, 0.0).is_err());
        assert!(SpectrumData::new(vec![1.0, 2.0, 3.0], AbscissaUnit::MicroEv, vec![0.0, -1.0, 0.0], Polarization::H, 0.0).is_err());
        assert!(SpectrumData::new(vec![1.0, 2.0], AbscissaUnit::MicroEv, vec![0.0; 3], Polarization::H, 0.0).is_err());
    }

    #[test]
    fn wavelength_axis_is_converted_and_sorted() {
        let s = SpectrumData::new(vec![889.9, 890.0, 890.1], AbscissaUnit::Nanometer, vec![1.0, 2.0, 3.0], Polarization::V, 1.0)
            .unwrap();
        let (e, c) = s.energy_series();
        assert!(e.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(c, vec![3.0, 2.0, 1.0]);
        assert!((e[1] - nm_to_uev(890.0)).abs() < 1e-6);
    }

    #[test]
    fn parse_rejects_bad_header() {
        let text = "# B=1\nev,counts\n1,2\n2,3\n";
        assert!(SpectrumData::read_csv(text.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip(
            start in 1.0e6f64..2.0e6,
            step in 0.01f64..5.0,
            counts in prop::collection::vec(0.0f64..1e6, 2..50),
            field in 0.0f64..10.0,
            pol in prop::sample::select(vec![Polarization::H, Polarization::V, Polarization::Unpolarized]),
        ) {
            let abscissa: Vec<f64> = (0..counts.len()).map(|i| start + step * i as f64).collect();
            let mut s = SpectrumData::new(abscissa, AbscissaUnit::MicroEv, counts, pol, field).unwrap();
            s.power = Some(field * 0.5 + 0.1);
            let back = SpectrumData::read_csv(s.to_csv_string().as_bytes()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
