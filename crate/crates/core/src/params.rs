use serde::{Deserialize, Serialize};

use crate::density::SpectralDensity;
use crate::error::{invalid, Result};
use crate::units::ghz_to_rad_per_ns;

/// Cavity and ensemble constants, all in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Cavity energy decay rate (FWHM of the bare cavity line).
    pub kappa: f64,
    /// Cavity resonance.
    pub cavity_frequency: f64,
    /// Collective coupling, `Omega^2 = sum_k g_k^2`.
    pub coupling: f64,
    /// Homogeneous linewidth of a single emitter.
    pub gamma_h: f64,
    pub density: SpectralDensity,
}

impl SystemParams {
    pub fn new(
        kappa: f64,
        cavity_frequency: f64,
        coupling: f64,
        gamma_h: f64,
        density: SpectralDensity,
    ) -> Result<Self> {
        let p = Self {
            kappa,
            cavity_frequency,
            coupling,
            gamma_h,
            density,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(invalid("kappa", format!("must be positive, got {}", self.kappa)));
        }
        if !self.cavity_frequency.is_finite() {
            return Err(invalid("cavity_frequency", "must be finite"));
        }
        // Omega = 0 is the empty-ensemble limit and stays legal
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(invalid("coupling", format!("must be non-negative, got {}", self.coupling)));
        }
        if !(self.gamma_h.is_finite() && self.gamma_h >= 0.0) {
            return Err(invalid("gamma_h", format!("must be non-negative, got {}", self.gamma_h)));
        }
        Ok(())
    }

    /// Cavity-ensemble detuning `omega_0 - omega_a`.
    pub fn detuning(&self) -> f64 {
        self.cavity_frequency - self.density.center
    }

    pub fn with_detuning(self, detuning: f64) -> Self {
        Self {
            cavity_frequency: self.density.center + detuning,
            ..self
        }
    }

    pub fn with_density(self, density: SpectralDensity) -> Self {
        Self { density, ..self }
    }

    pub fn with_coupling(self, coupling: f64) -> Self {
        Self { coupling, ..self }
    }
}

/// Named parameter sets for the two Nd:YVO devices (ensemble centred at 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 0.1% device, both Zeeman branches as one Gaussian (Delta = 14.6 GHz).
    NdYvo01Gaussian,
    /// 0.1% device, two resolved Gaussian branches (Delta = 5.0 GHz, delta_a = 8.5 GHz).
    NdYvo01DoubleGaussian,
    /// 1% device (Delta = 45.6 GHz Gaussian).
    NdYvo1,
}

impl Preset {
    pub fn params(self) -> SystemParams {
        let g = ghz_to_rad_per_ns;
        let (kappa, coupling, gamma_h, density) = match self {
            Preset::NdYvo01Gaussian => (
                44.0,
                25.0,
                0.82e-3,
                SpectralDensity::gaussian(0.0, g(14.6)).expect("valid preset"),
            ),
            Preset::NdYvo01DoubleGaussian => (
                44.0,
                25.0,
                0.82e-3,
                SpectralDensity::double_gaussian(0.0, g(5.0), g(8.5)).expect("valid preset"),
            ),
            Preset::NdYvo1 => (
                20.0,
                55.0,
                40e-3,
                SpectralDensity::gaussian(0.0, g(45.6)).expect("valid preset"),
            ),
        };
        SystemParams {
            kappa: g(kappa),
            cavity_frequency: 0.0,
            coupling: g(coupling),
            gamma_h: g(gamma_h),
            density,
        }
    }
}
