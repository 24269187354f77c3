use crate::units::{angular_to_ghz, ghz_to_angular};

use super::SolverError;

/// Physical parameters of the driven four-level model.
///
/// All rates and splittings are angular frequencies in rad/ns. Use the
/// `*_ghz` helpers to work in the "`x/2π` in GHz" convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Excited (trion) state Zeeman splitting δ_e.
    pub delta_e: f64,
    /// Ground (hole) state Zeeman splitting δ_h.
    pub delta_h: f64,
    /// Laser detuning Δ = ω_l − ω_o.
    pub laser_detuning: f64,
    /// Drive strength Ω. The drive term is Ω(σ₁₃ + σ₂₄) + h.c., so a single
    /// transition sees a Rabi frequency of 2Ω.
    pub rabi: f64,
    /// Decay rate γ of each of the four radiative channels.
    pub gamma: f64,
    /// Ground-state spin lifetime T1 in ns; `None` means no spin flips.
    pub t1_spin: Option<f64>,
}

impl SystemParams {
    /// Canonical simulation point: δ_e = δ_h = 2π·23.8 GHz, Δ = 0,
    /// Ω = 2π·1.0 GHz, γ = 2π·0.25 GHz, no spin relaxation.
    pub fn canonical() -> Self {
        Self::from_ghz(23.8, 23.8, 0.0, 1.0, 0.25)
    }

    /// Builds parameters from `x/2π` values in GHz.
    pub fn from_ghz(delta_e: f64, delta_h: f64, detuning: f64, rabi: f64, gamma: f64) -> Self {
        Self {
            delta_e: ghz_to_angular(delta_e),
            delta_h: ghz_to_angular(delta_h),
            laser_detuning: ghz_to_angular(detuning),
            rabi: ghz_to_angular(rabi),
            gamma: ghz_to_angular(gamma),
            t1_spin: None,
        }
    }

    pub fn with_detuning_ghz(mut self, detuning: f64) -> Self {
        self.laser_detuning = ghz_to_angular(detuning);
        self
    }

    pub fn with_rabi_ghz(mut self, rabi: f64) -> Self {
        self.rabi = ghz_to_angular(rabi);
        self
    }

    pub fn with_t1(mut self, t1_ns: Option<f64>) -> Self {
        self.t1_spin = t1_ns;
        self
    }

    pub fn detuning_ghz(&self) -> f64 {
        angular_to_ghz(self.laser_detuning)
    }

    pub fn rabi_ghz(&self) -> f64 {
        angular_to_ghz(self.rabi)
    }

    pub fn gamma_ghz(&self) -> f64 {
        angular_to_ghz(self.gamma)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let finite = [self.delta_e, self.delta_h, self.laser_detuning, self.rabi, self.gamma]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(SolverError::InvalidParams("non-finite parameter".into()));
        }
        if self.gamma <= 0.0 {
            return Err(SolverError::InvalidParams(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if self.rabi < 0.0 {
            return Err(SolverError::InvalidParams(format!("rabi must be >= 0, got {}", self.rabi)));
        }
        if self.delta_e < 0.0 || self.delta_h < 0.0 {
            return Err(SolverError::InvalidParams("Zeeman splittings must be >= 0".into()));
        }
        if let Some(t1) = self.t1_spin {
            if !(t1 > 0.0) {
                return Err(SolverError::InvalidParams(format!("t1_spin must be > 0, got {t1}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_is_valid() {
        assert!(SystemParams::canonical().validate().is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let p = SystemParams::canonical();
        assert!(SystemParams { gamma: 0.0, ..p }.validate().is_err());
        assert!(SystemParams { rabi: -1.0, ..p }.validate().is_err());
        assert!(SystemParams { delta_h: -1.0, ..p }.validate().is_err());
        assert!(p.with_t1(Some(0.0)).validate().is_err());
        assert!(SystemParams { laser_detuning: f64::NAN, ..p }.validate().is_err());
        // Ω = 0 is a valid parameter set, only the steady state is degenerate.
        assert!(p.with_rabi_ghz(0.0).validate().is_ok());
    }
}
