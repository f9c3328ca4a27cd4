//! Input pulses in the frame rotating at the ensemble centre.
//!
//! Convention: `E(t) = (1/2pi) int E~(w) exp(-i w t) dw`. Every pulse is a
//! transform-limited Gaussian of unit energy, optionally shaped by a
//! frequency-domain filter, then synthesized on a uniform time grid by FFT
//! and evaluated between samples with cubic Hermite interpolation.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::PolaritonPair;

/// Frequency-domain shaping applied to one pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "filter", rename_all = "snake_case")]
pub enum PulseFilter {
    None,
    /// Rectangular window of width `Omega_R / 2` on the lower polariton.
    BandpassLower,
    /// Rectangular window of width `Omega_R / 2` on the upper polariton.
    BandpassUpper,
    /// Spectral phase rising linearly from 0 at `omega_-` to `phase` at
    /// `omega_+`, flat outside.
    GtiChirp { phase: f64 },
    /// Both bandpass windows, weighted by `alpha` (lower) and `beta` (upper).
    Bins {
        alpha: Complex64,
        beta: Complex64,
    },
    /// Both bandpass windows seen through the etalon phase of `GtiChirp`.
    ChirpedBins { phase: f64 },
}

impl PulseFilter {
    pub fn response(&self, omega: f64, modes: &PolaritonPair) -> Complex64 {
        let half = 0.25 * modes.rabi_splitting().abs();
        let in_lower = (omega - modes.omega_minus).abs() <= half;
        let in_upper = (omega - modes.omega_plus).abs() <= half;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match *self {
            PulseFilter::None => one,
            PulseFilter::BandpassLower => {
                if in_lower {
                    one
                } else {
                    zero
                }
            }
            PulseFilter::BandpassUpper => {
                if in_upper {
                    one
                } else {
                    zero
                }
            }
            PulseFilter::GtiChirp { phase } => {
                let span = modes.omega_plus - modes.omega_minus;
                let frac = if span > 0.0 {
                    ((omega - modes.omega_minus) / span).clamp(0.0, 1.0)
                } else if omega >= modes.omega_plus {
                    1.0
                } else {
                    0.0
                };
                Complex64::from_polar(1.0, phase * frac)
            }
            PulseFilter::Bins { alpha, beta } => {
                let mut h = zero;
                if in_lower {
                    h += alpha;
                }
                if in_upper {
                    h += beta;
                }
                h
            }
            PulseFilter::ChirpedBins { phase } => {
                if in_lower || in_upper {
                    PulseFilter::GtiChirp { phase }.response(omega, modes)
                } else {
                    zero
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PulseFilter::GtiChirp { phase } | PulseFilter::ChirpedBins { phase } if !phase.is_finite() => {
                Err(invalid("gti_phase", "must be finite"))
            }
            PulseFilter::Bins { alpha, beta } if alpha.norm() > 1.0 + 1e-12 || beta.norm() > 1.0 + 1e-12 => {
                Err(invalid("filter", "bin weights must have modulus <= 1"))
            }
            _ => Ok(()),
        }
    }
}

/// One pulse. Times in ns, frequencies in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    /// Peak time of the unfiltered envelope.
    pub center: f64,
    /// Intensity FWHM of the transform-limited envelope.
    pub width: f64,
    /// Carrier phase.
    pub phase: f64,
    /// Carrier offset from the ensemble centre.
    pub carrier: f64,
    /// Field amplitude; 1 means unit energy before filtering.
    pub amplitude: f64,
    pub filter: PulseFilter,
}

impl Pulse {
    pub fn new(center: f64, width: f64) -> Self {
        Self {
            center,
            width,
            phase: 0.0,
            carrier: 0.0,
            amplitude: 1.0,
            filter: PulseFilter::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(invalid("pulse width", format!("must be positive, got {}", self.width)));
        }
        if !(self.center.is_finite() && self.phase.is_finite() && self.carrier.is_finite()) {
            return Err(invalid("pulse", "centre, phase and carrier must be finite"));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(invalid("pulse amplitude", "must be non-negative"));
        }
        self.filter.validate()
    }

    fn alpha(&self) -> f64 {
        2.0 * LN_2 / (self.width * self.width)
    }

    /// Unfiltered envelope peak amplitude giving unit energy.
    fn peak(&self) -> f64 {
        (4.0 * LN_2 / (PI * self.width * self.width)).powf(0.25)
    }

    /// Spectrum `E~(omega)` including the filter.
    pub fn spectrum(&self, omega: f64, modes: &PolaritonPair) -> Complex64 {
        let a = self.alpha();
        let nu = omega - self.carrier;
        let env = self.amplitude * self.peak() * (PI / a).sqrt() * (-nu * nu / (4.0 * a)).exp();
        Complex64::from_polar(env, self.phase + omega * self.center) * self.filter.response(omega, modes)
    }

    /// Unfiltered field at time `t`.
    pub fn envelope(&self, t: f64) -> Complex64 {
        let s = t - self.center;
        Complex64::from_polar(
            self.amplitude * self.peak() * (-self.alpha() * s * s).exp(),
            self.phase - self.carrier * s,
        )
    }
}

/// Two delayed copies of a pulse, as used in the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulsePair {
    /// Intensity FWHM, ns.
    pub width: f64,
    /// Delay of the second pulse, ns.
    pub delay: f64,
    /// Carrier phase of the second pulse relative to the first.
    pub phase: f64,
    pub first: PulseFilter,
    pub second: PulseFilter,
    pub first_amplitude: f64,
    pub second_amplitude: f64,
}

impl PulsePair {
    pub fn new(width: f64, delay: f64, phase: f64) -> Self {
        Self {
            width,
            delay,
            phase,
            first: PulseFilter::None,
            second: PulseFilter::None,
            first_amplitude: 1.0,
            second_amplitude: 1.0,
        }
    }

    pub fn with_filters(self, first: PulseFilter, second: PulseFilter) -> Self {
        Self { first, second, ..self }
    }

    pub fn with_delay(self, delay: f64) -> Self {
        Self { delay, ..self }
    }

    pub fn with_phase(self, phase: f64) -> Self {
        Self { phase, ..self }
    }

    /// First pulse peaks at `t = 0`, the second at `t = delay`.
    pub fn pulses(&self) -> [Pulse; 2] {
        [
            Pulse {
                amplitude: self.first_amplitude,
                filter: self.first,
                ..Pulse::new(0.0, self.width)
            },
            Pulse {
                phase: self.phase,
                amplitude: self.second_amplitude,
                filter: self.second,
                ..Pulse::new(self.delay, self.width)
            },
        ]
    }
}

/// A sampled input field `c_in(t)` with its derivative.
#[derive(Debug, Clone)]
pub struct InputField {
    t0: f64,
    dt: f64,
    values: Vec<Complex64>,
    derivs: Vec<Complex64>,
}

impl InputField {
    /// Synthesizes the sum of `pulses` for use on `[t_start, t_end]`.
    ///
    /// The FFT period is four times the requested span so that slowly
    /// decaying tails of hard-edged filters do not wrap into the window.
    pub fn synthesize(pulses: &[Pulse], modes: &PolaritonPair, t_start: f64, t_end: f64) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(invalid("time window", "t_end must exceed t_start"));
        }
        for p in pulses {
            p.validate()?;
        }
        let min_width = pulses.iter().map(|p| p.width).fold(f64::INFINITY, f64::min);
        let max_carrier = pulses.iter().map(|p| p.carrier.abs()).fold(0.0, f64::max);
        let span = t_end - t_start;
        let mut dt = (min_width / 64.0).min(span / 64.0);
        // keep carriers well below Nyquist
        if max_carrier > 0.0 {
            dt = dt.min(PI / (8.0 * max_carrier));
        }
        let n = (4.0 * span / dt).ceil().max(64.0) as usize;
        let n = n.next_power_of_two();
        let dt = 4.0 * span / n as f64;
        let t0 = t_start - 1.5 * span;
        let dw = 2.0 * PI / (n as f64 * dt);

        let mut spec = vec![Complex64::new(0.0, 0.0); n];
        let mut dspec = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            let w = kk * dw;
            let e: Complex64 = pulses.iter().map(|p| p.spectrum(w, modes)).sum();
            let v = e * Complex64::from_polar(1.0 / (n as f64 * dt), -w * t0);
            spec[k] = v;
            dspec[k] = v * Complex64::new(0.0, -w);
        }
        let fft = FftPlanner::new().plan_fft_forward(n);
        fft.process(&mut spec);
        fft.process(&mut dspec);
        Ok(Self {
            t0,
            dt,
            values: spec,
            derivs: dspec,
        })
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let x = (t - self.t0) / self.dt;
        if !(x >= 0.0) || x >= (self.values.len() - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = x.floor() as usize;
        let s = x - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.derivs[i] * self.dt, self.derivs[i + 1] * self.dt);
        let s2 = s * s;
        let s3 = s2 * s;
        y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + m0 * (s3 - 2.0 * s2 + s)
            + y1 * (-2.0 * s3 + 3.0 * s2)
            + m1 * (s3 - s2)
    }

    pub fn sample_spacing(&self) -> f64 {
        self.dt
    }
}
