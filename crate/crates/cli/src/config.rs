//! Flat `key = value` run configuration.
//!
//! Values come from an optional config file and from command-line flags of
//! the same name (`--kappa-ghz 44` sets `kappa_ghz`); flags win. Frequencies
//! are ordinary frequencies in GHz and times are in ps.

use std::collections::BTreeMap;
use std::path::Path;

use cavprot_core::density::SpectralDensity;
use cavprot_core::params::{Preset, SystemParams};
use cavprot_core::pulse::PulseFilter;
use cavprot_core::units::ghz_to_rad_per_ns as ghz;

use crate::error::CliError;

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("preset", "parameter preset: nd-yvo-0.1pct, nd-yvo-0.1pct-double or nd-yvo-1pct"),
    ("density", "ensemble lineshape: gaussian, lorentzian, q-gaussian or double-gaussian"),
    ("kappa_ghz", "cavity energy decay rate kappa/2pi"),
    ("coupling_ghz", "collective coupling Omega/2pi"),
    ("gamma_h_ghz", "homogeneous linewidth gamma_h/2pi"),
    ("width_ghz", "inhomogeneous width Delta/2pi"),
    ("half_splitting_ghz", "branch offset delta_a/2pi of the double Gaussian"),
    ("q", "shape parameter of the q-Gaussian"),
    ("detuning_ghz", "cavity-ensemble detuning delta/2pi"),
    ("f_min_ghz", "spectrum: lowest probe frequency, relative to the ensemble centre"),
    ("f_max_ghz", "spectrum: highest probe frequency"),
    ("points", "spectrum: number of frequencies"),
    ("delta_min_ghz", "sweep: first detuning"),
    ("delta_max_ghz", "sweep: last detuning"),
    ("delta_step_ghz", "sweep: detuning step"),
    ("method", "sweep: poles or fwhm"),
    ("pulse_width_ps", "intensity FWHM of the transform-limited pulses"),
    ("delay_ps", "dynamics: second pulse delay; tomography: storage delay"),
    ("phase_rad", "dynamics: carrier phase of the second pulse"),
    ("first_filter", "filter on the first pulse: none, bandpass-lower, bandpass-upper or gti"),
    ("second_filter", "filter on the second pulse"),
    ("gti_phase_rad", "etalon phase step across the two polaritons"),
    ("dt_ps", "dynamics: output sample spacing"),
    ("tau_min_ps", "fringes: first delay"),
    ("tau_max_ps", "fringes: last delay"),
    ("tau_step_ps", "fringes: delay step"),
    ("n_sim", "number of simulated emitters"),
    ("seed", "emitter sampling seed"),
    ("converge", "fringes: double n_sim until amplitudes change by < 1% (true/false)"),
    ("state", "tomography: zero, plus, circular or all"),
    ("source", "tomography: simulated or ideal amplitudes"),
    ("mu", "classical-bound: mean photon number"),
    ("eta", "classical-bound: storage and retrieval efficiency"),
    ("out", "output file; '-' for stdout"),
    ("format", "csv or json"),
];

/// Keys a `reproduce` run accepts; the physics of each target is fixed.
pub const REPRODUCE_KEYS: &[&str] = &["n_sim", "seed", "converge", "out", "format"];

#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn known(key: &str) -> bool {
        KEYS.iter().any(|(k, _)| *k == key)
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = || format!("{origin}:{}", i + 1);
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Config(format!("{}: expected `key = value`, got `{line}`", at())));
            };
            let (k, v) = (k.trim(), v.trim());
            if !Self::known(k) {
                return Err(CliError::Config(format!("{}: unknown key `{k}`", at())));
            }
            if v.is_empty() {
                return Err(CliError::Config(format!("{}: key `{k}` has no value", at())));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(CliError::Config(format!("{}: key `{k}` given twice", at())));
            }
        }
        Ok(Self { values })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("key `{key}`: cannot parse `{v}`"))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        let v: Option<f64> = self.parsed(key)?;
        match v {
            Some(x) if !x.is_finite() => Err(CliError::Config(format!("key `{key}`: must be finite"))),
            _ => Ok(v),
        }
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.f64(key)?.unwrap_or(default);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(CliError::Config(format!("key `{key}`: must be positive, got {v}")))
        }
    }

    pub fn non_negative(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.f64(key)? {
            Some(v) if v < 0.0 => Err(CliError::Config(format!("key `{key}`: must not be negative, got {v}"))),
            v => Ok(v),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64, CliError> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn bool(&self, key: &str) -> Result<bool, CliError> {
        Ok(self.parsed(key)?.unwrap_or(false))
    }

    pub fn choice<'a>(&'a self, key: &str, allowed: &[&'a str], default: &'a str) -> Result<&'a str, CliError> {
        let v = self.get(key).unwrap_or(default);
        if allowed.contains(&v) {
            Ok(v)
        } else {
            Err(CliError::Config(format!(
                "key `{key}`: expected one of {}, got `{v}`",
                allowed.join(", ")
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn format(c: &RawConfig) -> Result<Format, CliError> {
    Ok(match c.choice("format", &["csv", "json"], "csv")? {
        "json" => Format::Json,
        _ => Format::Csv,
    })
}

pub fn preset(c: &RawConfig) -> Result<Preset, CliError> {
    Ok(match c.choice("preset", &["nd-yvo-0.1pct", "nd-yvo-0.1pct-double", "nd-yvo-1pct"], "nd-yvo-0.1pct")? {
        "nd-yvo-0.1pct-double" => Preset::NdYvo01DoubleGaussian,
        "nd-yvo-1pct" => Preset::NdYvo1,
        _ => Preset::NdYvo01Gaussian,
    })
}

/// Default pulse width of each device's interferometer, ps.
pub fn default_pulse_width(p: Preset) -> f64 {
    match p {
        Preset::NdYvo1 => 1.5,
        _ => 4.0,
    }
}

/// Preset parameters with any explicit overrides applied.
pub fn system(c: &RawConfig) -> Result<SystemParams, CliError> {
    let mut p = preset(c)?.params();
    if let Some(v) = c.f64("kappa_ghz")? {
        p.kappa = ghz(v);
    }
    if let Some(v) = c.non_negative("coupling_ghz")? {
        p.coupling = ghz(v);
    }
    if let Some(v) = c.non_negative("gamma_h_ghz")? {
        p.gamma_h = ghz(v);
    }
    if let Some(v) = c.f64("detuning_ghz")? {
        p.cavity_frequency = p.density.center + ghz(v);
    }
    let kinds = ["gaussian", "lorentzian", "q-gaussian", "double-gaussian"];
    let current = match p.density.kind {
        cavprot_core::density::DensityKind::Lorentzian => "lorentzian",
        cavprot_core::density::DensityKind::Gaussian => "gaussian",
        cavprot_core::density::DensityKind::QGaussian { .. } => "q-gaussian",
        cavprot_core::density::DensityKind::DoubleGaussian { .. } => "double-gaussian",
    };
    let kind = c.choice("density", &kinds, current)?;
    let width = c.f64("width_ghz")?.map(ghz).unwrap_or(p.density.width);
    let split = c
        .non_negative("half_splitting_ghz")?
        .map(ghz)
        .unwrap_or(p.density.half_splitting());
    let center = p.density.center;
    p.density = match kind {
        "lorentzian" => SpectralDensity::lorentzian(center, width),
        "q-gaussian" => SpectralDensity::q_gaussian(center, width, c.f64("q")?.unwrap_or(1.01)),
        "double-gaussian" => SpectralDensity::double_gaussian(center, width, split),
        _ => SpectralDensity::gaussian(center, width),
    }
    .map_err(CliError::Numerical)?;
    p.validate().map_err(CliError::Numerical)?;
    Ok(p)
}

pub fn filter(c: &RawConfig, key: &str) -> Result<PulseFilter, CliError> {
    let phase = c.f64("gti_phase_rad")?.unwrap_or(0.52 * std::f64::consts::PI);
    Ok(match c.choice(key, &["none", "bandpass-lower", "bandpass-upper", "gti"], "none")? {
        "bandpass-lower" => PulseFilter::BandpassLower,
        "bandpass-upper" => PulseFilter::BandpassUpper,
        "gti" => PulseFilter::GtiChirp { phase },
        _ => PulseFilter::None,
    })
}
