//! Run configuration. Every key has a default, so an empty file (or no file)
//! reproduces the canonical runs; unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::fit::spectrum::Polarization;
use crate::fit::synth::{Noise, SynthTruth};
use crate::quantum::SystemParams;
use crate::scan::ScanGrid;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub scan: ScanSection,
    pub sweep: SweepSection,
    pub synth: SynthSection,
    pub fit: FitSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub delta_e_ghz: f64,
    pub delta_h_ghz: f64,
    pub detuning_ghz: f64,
    pub rabi_ghz: f64,
    pub gamma_ghz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1_ns: Option<f64>,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self { delta_e_ghz: 23.8, delta_h_ghz: 23.8, detuning_ghz: 0.0, rabi_ghz: 1.0, gamma_ghz: 0.25, t1_ns: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub start_ghz: f64,
    pub stop_ghz: f64,
    pub points: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self { start_ghz: -3.0, stop_ghz: 3.0, points: 601 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub g_e: f64,
    pub field_t: f64,
    pub g_h_start: f64,
    pub g_h_stop: f64,
    pub g_h_points: usize,
    /// Explicit hole g values; replaces the start/stop/points range.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_h_values: Option<Vec<f64>>,
    pub omega_max_ghz: f64,
    pub omega_points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            g_e: 0.34,
            field_t: 5.0,
            g_h_start: 0.24,
            g_h_stop: 0.44,
            g_h_points: 41,
            g_h_values: None,
            omega_max_ghz: 2.85,
            omega_points: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub e0_uev: f64,
    pub kappa_uev_t2: f64,
    pub g_e: f64,
    pub g_h: f64,
    pub fields_t: Vec<f64>,
    pub linewidth_uev: f64,
    pub outer_amplitude: f64,
    pub inner_amplitude: f64,
    pub background: f64,
    pub fss_uev: f64,
    pub half_window_uev: f64,
    pub points: usize,
    /// "poisson" or "none"
    pub noise: String,
    pub seed: u64,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            e0_uev: 1_393_000.0,
            kappa_uev_t2: 5.07,
            g_e: 0.34,
            g_h: 0.34,
            fields_t: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            linewidth_uev: 22.0,
            outer_amplitude: 900.0,
            inner_amplitude: 900.0,
            background: 0.0,
            fss_uev: 1.8,
            half_window_uev: 200.0,
            points: 801,
            noise: "poisson".into(),
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    /// Peak counts tried by `fit peaks` when `--peaks` is not given.
    pub peak_candidates: Vec<usize>,
    pub f_test_threshold: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        Self { peak_candidates: vec![1, 2, 3, 4], f_test_threshold: 0.01 }
    }
}

/// (section, key, meaning) for every configuration key, shown in `--help`.
pub const SECTIONS: &[&str] = &["system", "scan", "sweep", "synth", "fit"];

pub const CONFIG_KEYS: &[(&str, &str, &str)] = &[
    ("system", "delta_e_ghz", "electron Zeeman splitting δ_e/2π [GHz] (23.8)"),
    ("system", "delta_h_ghz", "hole Zeeman splitting δ_h/2π [GHz] (23.8)"),
    ("system", "detuning_ghz", "laser detuning Δ/2π for single-point runs [GHz] (0)"),
    ("system", "rabi_ghz", "Rabi frequency Ω/2π [GHz] (1.0)"),
    ("system", "gamma_ghz", "optical decay rate γ/2π [GHz] (0.25)"),
    ("system", "t1_ns", "ground-state spin relaxation time T1 [ns] (unset: no relaxation)"),
    ("scan", "start_ghz", "first detuning Δ/2π [GHz] (-3)"),
    ("scan", "stop_ghz", "last detuning Δ/2π [GHz] (3)"),
    ("scan", "points", "number of detunings (601)"),
    ("sweep", "g_e", "electron g factor for the g_h sweep (0.34)"),
    ("sweep", "field_t", "magnetic field for the g_h sweep [T] (5)"),
    ("sweep", "g_h_start", "first hole g factor (0.24)"),
    ("sweep", "g_h_stop", "last hole g factor (0.44)"),
    ("sweep", "g_h_points", "number of hole g factors (41)"),
    ("sweep", "g_h_values", "explicit list of hole g factors, overrides the range (unset)"),
    ("sweep", "omega_max_ghz", "largest Ω/2π of the power sweep [GHz] (2.85)"),
    ("sweep", "omega_points", "number of evenly spaced Ω/2π values in (0, max] (20)"),
    ("synth", "e0_uev", "zero-field line energy [μeV] (1393000)"),
    ("synth", "kappa_uev_t2", "diamagnetic coefficient [μeV/T²] (5.07)"),
    ("synth", "g_e", "electron g factor (0.34)"),
    ("synth", "g_h", "hole g factor (0.34)"),
    ("synth", "fields_t", "magnetic fields, one H and one V file each [T] ([0,1,2,3,4,5])"),
    ("synth", "linewidth_uev", "FWHM of every line [μeV] (22)"),
    ("synth", "outer_amplitude", "peak counts of each outer line (900)"),
    ("synth", "inner_amplitude", "peak counts of each inner line (900)"),
    ("synth", "background", "constant background counts (0)"),
    ("synth", "fss_uev", "zero-field H/V splitting [μeV] (1.8)"),
    ("synth", "half_window_uev", "half-width of the energy window [μeV] (200)"),
    ("synth", "points", "samples per spectrum (801)"),
    ("synth", "noise", "\"poisson\" or \"none\" (poisson)"),
    ("synth", "seed", "random seed (7)"),
    ("fit", "peak_candidates", "peak counts tried by `fit peaks` ([1,2,3,4])"),
    ("fit", "f_test_threshold", "p-value for accepting an extra peak (0.01)"),
];

/// Help text listing the keys of `sections`.
pub fn keys_help(sections: &[&str]) -> String {
    let mut out = String::from("Config keys:\n");
    for sec in sections {
        out.push_str(&format!("  [{sec}]\n"));
        for (_, key, doc) in CONFIG_KEYS.iter().filter(|(s, _, _)| s == sec) {
            out.push_str(&format!("    {key:<18} {doc}\n"));
        }
    }
    out
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn validate(&self) -> Result<(), String> {
        self.system_params().validate().map_err(|e| e.to_string())?;
        self.scan_grid()?;
        let sw = &self.sweep;
        if !(sw.g_e > 0.0) || !(sw.field_t >= 0.0) {
            return Err("sweep: need g_e > 0 and field_t >= 0".into());
        }
        if self.g_h_grid().is_empty() {
            return Err("sweep: hole g grid is empty".into());
        }
        if self.g_h_grid().iter().any(|g| !(*g >= 0.0)) {
            return Err("sweep: hole g factors must be >= 0".into());
        }
        if sw.g_h_values.is_none() && sw.g_h_points > 1 && !(sw.g_h_stop > sw.g_h_start) {
            return Err("sweep: g_h_stop must exceed g_h_start".into());
        }
        if !(sw.omega_max_ghz > 0.0) || sw.omega_points == 0 {
            return Err("sweep: need omega_max_ghz > 0 and omega_points >= 1".into());
        }
        let sy = &self.synth;
        self.noise()?;
        if !(sy.linewidth_uev > 0.0) || !(sy.half_window_uev > 0.0) || sy.points < 2 {
            return Err("synth: need linewidth_uev > 0, half_window_uev > 0, points >= 2".into());
        }
        if sy.fields_t.iter().any(|b| !(*b >= 0.0)) {
            return Err("synth: fields must be >= 0".into());
        }
        if sy.outer_amplitude < 0.0 || sy.inner_amplitude < 0.0 || sy.background < 0.0 {
            return Err("synth: amplitudes and background must be >= 0".into());
        }
        let f = &self.fit;
        if f.peak_candidates.is_empty() || f.peak_candidates.contains(&0) {
            return Err("fit: peak_candidates must be non-empty and >= 1".into());
        }
        if !(f.f_test_threshold > 0.0 && f.f_test_threshold < 1.0) {
            return Err("fit: f_test_threshold must lie in (0, 1)".into());
        }
        Ok(())
    }

    pub fn system_params(&self) -> SystemParams {
        let s = &self.system;
        SystemParams::from_ghz(s.delta_e_ghz, s.delta_h_ghz, s.detuning_ghz, s.rabi_ghz, s.gamma_ghz).with_t1(s.t1_ns)
    }

    pub fn scan_grid(&self) -> Result<ScanGrid, String> {
        ScanGrid::new(self.scan.start_ghz, self.scan.stop_ghz, self.scan.points).map_err(|e| format!("scan: {e}"))
    }

    pub fn g_h_grid(&self) -> Vec<f64> {
        let sw = &self.sweep;
        match &sw.g_h_values {
            Some(v) => v.clone(),
            None if sw.g_h_points == 1 => vec![sw.g_h_start],
            None if sw.g_h_points == 0 => Vec::new(),
            None => ScanGrid { start: sw.g_h_start, stop: sw.g_h_stop, count: sw.g_h_points }.points(),
        }
    }

    pub fn omega_grid(&self) -> Vec<f64> {
        let n = self.sweep.omega_points;
        (1..=n).map(|i| self.sweep.omega_max_ghz * i as f64 / n as f64).collect()
    }

    pub fn noise(&self) -> Result<Noise, String> {
        match self.synth.noise.as_str() {
            "poisson" => Ok(Noise::Poisson),
            "none" => Ok(Noise::None),
            other => Err(format!("synth: noise must be \"poisson\" or \"none\", got \"{other}\"")),
        }
    }

    pub fn synth_truth(&self, field: f64, polarization: Polarization) -> SynthTruth {
        let s = &self.synth;
        SynthTruth {
            e0: s.e0_uev,
            kappa: s.kappa_uev_t2,
            g_e: s.g_e,
            g_h: s.g_h,
            field,
            linewidth: s.linewidth_uev,
            outer_amplitude: s.outer_amplitude,
            inner_amplitude: s.inner_amplitude,
            background: s.background,
            fss: s.fss_uev,
            polarization,
            half_window: s.half_window_uev,
            n_points: s.points,
        }
    }
}
