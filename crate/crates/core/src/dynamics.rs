//! Reduced-N time-domain model: one cavity mode coupled to `N_sim` linear
//! emitter modes, integrated in the frame rotating at the ensemble centre.
//!
//! ```text
//! a'   = -(kappa/2 + i delta) a - sqrt(kappa/2) c_in + g sum_k b_k
//! b_k' = -(gamma_h/2 + i w_k) b_k - g a
//! c_t  = sqrt(kappa/2) a,   c_r = c_in + sqrt(kappa/2) a
//! ```
//!
//! Its steady-state response to `exp(-i w t)` is `t(w) = (i kappa/2) / D(w)`
//! with the discrete susceptibility `sum g^2 / (w - w_k + i gamma_h/2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::SpectralDensity;
use crate::error::{invalid, Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::params::SystemParams;
use crate::pulse::{InputField, Pulse, PulseFilter, PulsePair};
use crate::spectral::{polariton_modes, PolaritonPair};

/// Default number of simulated emitters before convergence doubling.
pub const DEFAULT_N_SIM: usize = 2000;
/// Simulated time after the last pulse, in cavity lifetimes `1/kappa`.
pub const TAIL_LIFETIMES: f64 = 10.0;

// state layout: cavity, three energy accumulators, emitters
const CAVITY: usize = 0;
const E_TRANSMITTED: usize = 1;
const E_REFLECTED: usize = 2;
const E_INPUT: usize = 3;
const FIRST_EMITTER: usize = 4;

/// Discrete emitter ensemble with uniform coupling `g = Omega / sqrt(N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitterBath {
    /// Transition frequencies, rad/ns, ascending.
    pub frequencies: Vec<f64>,
    pub coupling: f64,
    pub seed: u64,
}

impl EmitterBath {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// `sum_k g^2`, equal to `Omega^2` up to rounding.
    pub fn collective_coupling_sq(&self) -> f64 {
        self.frequencies.iter().map(|_| self.coupling * self.coupling).sum()
    }

    /// Discrete-ensemble transmission, the exact frequency response of
    /// [`simulate`].
    pub fn transmission(&self, p: &SystemParams, omega: f64) -> Complex64 {
        let g2 = self.coupling * self.coupling;
        let chi: Complex64 = self
            .frequencies
            .iter()
            .map(|&wk| g2 / Complex64::new(omega - wk, 0.5 * p.gamma_h))
            .sum();
        let d = Complex64::new(p.cavity_frequency - omega, -0.5 * p.kappa) + chi;
        Complex64::new(0.0, 0.5 * p.kappa) / d
    }
}

/// Draws `n_sim` emitter frequencies from `d` by stratified inverse-CDF
/// sampling: one uniform draw inside each of `n_sim` equal-probability
/// strata, mapped through the inverse CDF. Deterministic for a given seed.
pub fn sample_emitters(d: &SpectralDensity, n_sim: usize, omega: f64, seed: u64) -> Result<EmitterBath> {
    if n_sim < 2 {
        return Err(invalid("n_sim", format!("need at least 2 emitters, got {n_sim}")));
    }
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(invalid("coupling", "must be non-negative"));
    }
    let d = SpectralDensity::new(d.kind, d.center, d.width)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_sim as f64;
    let frequencies = (0..n_sim)
        .map(|k| {
            let u = (k as f64 + rng.gen_range(f64::EPSILON..1.0)) / n;
            d.inverse_cdf(u)
        })
        .collect();
    Ok(EmitterBath {
        frequencies,
        coupling: omega / n.sqrt(),
        seed,
    })
}

/// Sampled fields on a time grid (ns), plus energies integrated over the
/// whole simulated interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldTrace {
    pub times: Vec<f64>,
    pub cavity: Vec<Complex64>,
    pub transmitted: Vec<Complex64>,
    pub reflected: Vec<Complex64>,
    pub input: Vec<Complex64>,
    pub transmitted_energy: f64,
    pub reflected_energy: f64,
    pub input_energy: f64,
    /// `|a|^2 + sum |b_k|^2` at the last grid time.
    pub stored_energy: f64,
}

impl FieldTrace {
    pub fn transmitted_intensity(&self) -> Vec<f64> {
        self.transmitted.iter().map(|c| c.norm_sqr()).collect()
    }
}

fn filter_modes(p: &SystemParams, pulses: &[Pulse]) -> Result<PolaritonPair> {
    let needs = pulses.iter().any(|q| !matches!(q.filter, PulseFilter::None));
    if !needs {
        return Ok(PolaritonPair {
            omega_plus: 0.0,
            omega_minus: 0.0,
            gamma_plus: 0.0,
            gamma_minus: 0.0,
            degenerate: true,
        });
    }
    let m = polariton_modes(p, p.detuning())?;
    Ok(PolaritonPair {
        omega_plus: m.omega_plus - p.density.center,
        omega_minus: m.omega_minus - p.density.center,
        ..m
    })
}

/// Time a pulse needs on either side of its centre, ns. Hard-edged
/// bandpass windows ring for several inverse window widths.
fn pulse_extent(q: &Pulse, modes: &PolaritonPair) -> f64 {
    let base = 3.0 * q.width;
    let rabi = modes.rabi_splitting().abs();
    match q.filter {
        PulseFilter::None => base,
        PulseFilter::GtiChirp { phase } if rabi > 0.0 => base + 2.0 * phase.abs() / rabi,
        _ if rabi > 0.0 => base + 16.0 * PI / rabi,
        _ => base,
    }
}

/// Simulation interval for a pulse sequence: from before the first pulse
/// to [`TAIL_LIFETIMES`] cavity lifetimes after the last one.
pub fn simulation_window(p: &SystemParams, pulses: &[Pulse]) -> Result<(f64, f64)> {
    if pulses.is_empty() {
        return Err(invalid("pulses", "at least one pulse is required"));
    }
    let modes = filter_modes(p, pulses)?;
    let start = pulses
        .iter()
        .map(|q| q.center - pulse_extent(q, &modes))
        .fold(f64::INFINITY, f64::min);
    let end = pulses
        .iter()
        .map(|q| q.center + pulse_extent(q, &modes))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((start, end + TAIL_LIFETIMES / p.kappa))
}

/// Uniform grid with spacing close to `dt` covering [`simulation_window`].
pub fn trace_grid(p: &SystemParams, pulses: &[Pulse], dt: f64) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    let (a, b) = simulation_window(p, pulses)?;
    let n = ((b - a) / dt).ceil() as usize + 1;
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

struct Model<'a> {
    decay: Complex64,
    emitter_decay: Vec<Complex64>,
    g: f64,
    root: f64,
    input: &'a InputField,
}

impl Model<'_> {
    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        let a = y[CAVITY];
        let c_in = self.input.eval(t);
        let mut sum = Complex64::new(0.0, 0.0);
        for ((b, d), l) in y[FIRST_EMITTER..]
            .iter()
            .zip(dy[FIRST_EMITTER..].iter_mut())
            .zip(&self.emitter_decay)
        {
            sum += b;
            *d = l * b - self.g * a;
        }
        dy[CAVITY] = self.decay * a - self.root * c_in + self.g * sum;
        let c_t = self.root * a;
        dy[E_TRANSMITTED] = Complex64::new(c_t.norm_sqr(), 0.0);
        dy[E_REFLECTED] = Complex64::new((c_in + c_t).norm_sqr(), 0.0);
        dy[E_INPUT] = Complex64::new(c_in.norm_sqr(), 0.0);
    }
}

fn run<S>(
    p: &SystemParams,
    bath: &EmitterBath,
    pulses: &[Pulse],
    t_start: f64,
    outputs: &[f64],
    sink: S,
) -> Result<(Vec<Complex64>, InputField)>
where
    S: FnMut(usize, &[Complex64]),
{
    p.validate()?;
    let t_end = *outputs.last().ok_or_else(|| invalid("t_grid", "must not be empty"))?;
    let modes = filter_modes(p, pulses)?;
    let input = InputField::synthesize(pulses, &modes, t_start, t_end)?;
    let center = p.density.center;
    let model = Model {
        decay: Complex64::new(-0.5 * p.kappa, -(p.cavity_frequency - center)),
        emitter_decay: bath
            .frequencies
            .iter()
            .map(|&w| Complex64::new(-0.5 * p.gamma_h, -(w - center)))
            .collect(),
        g: bath.coupling,
        root: (0.5 * p.kappa).sqrt(),
        input: &input,
    };
    let min_width = pulses.iter().map(|q| q.width).fold(f64::INFINITY, f64::min);
    let opts = OdeOptions {
        // never let the step outgrow a pulse while the state is still empty
        max_step: 0.25 * min_width,
        ..OdeOptions::default()
    };
    let y0 = vec![Complex64::new(0.0, 0.0); FIRST_EMITTER + bath.len()];
    let (y, _) = integrate(|t, y, dy| model.rhs(t, y, dy), t_start, &y0, outputs, opts, sink)?;
    Ok((y, input))
}

fn stored(y: &[Complex64]) -> f64 {
    y[CAVITY].norm_sqr() + y[FIRST_EMITTER..].iter().map(|b| b.norm_sqr()).sum::<f64>()
}

/// Integrates the coupled equations from an empty cavity and unexcited
/// ensemble at `t_grid[0]`, reporting fields on `t_grid` (ns, ascending).
pub fn simulate(p: &SystemParams, bath: &EmitterBath, pulses: &[Pulse], t_grid: &[f64]) -> Result<FieldTrace> {
    if t_grid.len() < 2 {
        return Err(invalid("t_grid", "need at least two times"));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("t_grid", "times must be strictly increasing"));
    }
    let n = t_grid.len();
    let root = (0.5 * p.kappa).sqrt();
    let mut cavity = vec![Complex64::new(0.0, 0.0); n];
    let (y, input) = run(p, bath, pulses, t_grid[0], t_grid, |i, y| cavity[i] = y[CAVITY])?;
    let input: Vec<Complex64> = t_grid.iter().map(|&t| input.eval(t)).collect();
    let transmitted: Vec<Complex64> = cavity.iter().map(|a| root * a).collect();
    let reflected = input.iter().zip(&transmitted).map(|(i, t)| i + t).collect();
    Ok(FieldTrace {
        times: t_grid.to_vec(),
        cavity,
        transmitted,
        reflected,
        input,
        transmitted_energy: y[E_TRANSMITTED].re,
        reflected_energy: y[E_REFLECTED].re,
        input_energy: y[E_INPUT].re,
        stored_energy: stored(&y),
    })
}

/// Transmitted energy for one pulse sequence over its [`simulation_window`].
pub fn transmitted_energy(p: &SystemParams, bath: &EmitterBath, pulses: &[Pulse]) -> Result<f64> {
    let (a, b) = simulation_window(p, pulses)?;
    let (y, _) = run(p, bath, pulses, a, &[b], |_, _| {})?;
    Ok(y[E_TRANSMITTED].re)
}

/// Carrier phases used per delay. Four quadratures give the full fringe
/// contrast; two (0 and pi) would only see its in-phase part.
pub const FRINGE_PHASES: [f64; 4] = [0.0, 0.5 * PI, PI, 1.5 * PI];

/// Fringe amplitude versus delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeTrace {
    /// Delays, ns.
    pub delays: Vec<f64>,
    /// Peak-to-peak fringe amplitude of the transmitted energy.
    pub amplitudes: Vec<f64>,
    /// Transmitted energy at each of [`FRINGE_PHASES`].
    pub counts: Vec<[f64; 4]>,
}

/// Peak-to-peak amplitude of `C(phi) = B + 2 Re(X e^{-i phi})` from its
/// four quadrature samples.
pub fn fringe_amplitude(c: &[f64; 4]) -> f64 {
    (c[0] - c[2]).hypot(c[1] - c[3])
}

/// Transmitted-energy fringe amplitude at each delay (parallel over delays
/// and phases).
pub fn fringe_scan(p: &SystemParams, bath: &EmitterBath, pp: &PulsePair, delays: &[f64]) -> Result<FringeTrace> {
    if delays.is_empty() {
        return Err(invalid("delays", "must not be empty"));
    }
    if delays.iter().any(|d| !d.is_finite()) {
        return Err(invalid("delays", "must be finite"));
    }
    let jobs: Vec<(usize, usize)> = (0..delays.len()).flat_map(|i| (0..4).map(move |j| (i, j))).collect();
    let energies: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let pair = pp.with_delay(delays[i]).with_phase(pp.phase + FRINGE_PHASES[j]);
            transmitted_energy(p, bath, &pair.pulses())
        })
        .collect::<Result<_>>()?;
    let counts: Vec<[f64; 4]> = energies.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
    Ok(FringeTrace {
        delays: delays.to_vec(),
        amplitudes: counts.iter().map(fringe_amplitude).collect(),
        counts,
    })
}

/// Largest change between two scans on the same delays, relative to the
/// largest amplitude of `reference`.
pub fn max_relative_change(reference: &FringeTrace, other: &FringeTrace) -> f64 {
    let scale = reference.amplitudes.iter().copied().fold(0.0, f64::max);
    reference
        .amplitudes
        .iter()
        .zip(&other.amplitudes)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Settings for [`converged_fringe_scan`].
#[derive(Debug, Clone, Copy)]
pub struct Convergence {
    pub initial_n_sim: usize,
    pub max_n_sim: usize,
    /// Accepted [`max_relative_change`] between successive doublings.
    pub tolerance: f64,
}

impl Default for Convergence {
    fn default() -> Self {
        Self {
            initial_n_sim: DEFAULT_N_SIM,
            max_n_sim: 64_000,
            tolerance: 0.01,
        }
    }
}

/// Fringe scan with `N_sim` doubled until the amplitudes stop changing.
/// Returns the scan at the accepted `N_sim` together with that count.
pub fn converged_fringe_scan(
    p: &SystemParams,
    pp: &PulsePair,
    delays: &[f64],
    seed: u64,
    conv: Convergence,
) -> Result<(FringeTrace, usize)> {
    let mut n = conv.initial_n_sim;
    let mut prev = fringe_scan(p, &sample_emitters(&p.density, n, p.coupling, seed)?, pp, delays)?;
    loop {
        if 2 * n > conv.max_n_sim {
            return Err(Error::OptimizerNonConvergence {
                iterations: n,
                cost: f64::NAN,
            });
        }
        let next = fringe_scan(p, &sample_emitters(&p.density, 2 * n, p.coupling, seed)?, pp, delays)?;
        if max_relative_change(&prev, &next) < conv.tolerance {
            return Ok((prev, n));
        }
        prev = next;
        n *= 2;
    }
}

/// Fraction of transmitted energy on the grid falling in `[t_start, t_end]`
/// (ns), by the trapezoid rule. A zero-length window gives 0.
pub fn retrieval_efficiency(trace: &FieldTrace, t_start: f64, t_end: f64) -> Result<f64> {
    let (Some(&first), Some(&last)) = (trace.times.first(), trace.times.last()) else {
        return Err(invalid("trace", "empty"));
    };
    if !(t_start <= t_end) {
        return Err(invalid("window", "t_start must not exceed t_end"));
    }
    if t_start < first || t_end > last {
        return Err(invalid("window", "must lie inside the trace"));
    }
    let intensity = trace.transmitted_intensity();
    let total = trapezoid(&trace.times, &intensity, first, last);
    if total <= 0.0 {
        return Err(invalid("trace", "no transmitted energy"));
    }
    Ok(trapezoid(&trace.times, &intensity, t_start, t_end) / total)
}

fn trapezoid(x: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let lerp = |t: f64| -> f64 {
        let i = x.partition_point(|&v| v <= t).clamp(1, x.len() - 1);
        let s = (t - x[i - 1]) / (x[i] - x[i - 1]);
        y[i - 1] + s * (y[i] - y[i - 1])
    };
    let mut pts: Vec<(f64, f64)> = vec![(a, lerp(a))];
    pts.extend(x.iter().zip(y).filter(|(t, _)| **t > a && **t < b).map(|(t, v)| (*t, *v)));
    pts.push((b, lerp(b)));
    pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}

/// Result of [`fit_exponential`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub amplitude: f64,
    /// 1/e time constant.
    pub decay_constant: f64,
}

/// Least-squares fit of `ln y = ln A - x / T` over points with `y > 0`.
pub fn fit_exponential(x: &[f64], y: &[f64]) -> Result<ExponentialFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, v)| **v > 0.0)
        .map(|(a, v)| (*a, v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(invalid("fit", "need at least two positive samples"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(invalid("fit", "abscissae are all equal"));
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(invalid("fit", "samples do not decay"));
    }
    Ok(ExponentialFit {
        amplitude: (my - slope * mx).exp(),
        decay_constant: -1.0 / slope,
    })
}

/// Interior local extrema of uniformly or non-uniformly sampled data,
/// refined by a parabola through the three neighbouring samples.
/// Returns `(x, y)` pairs.
pub fn local_extrema(x: &[f64], y: &[f64], maxima: bool) -> Vec<(f64, f64)> {
    let sign = if maxima { 1.0 } else { -1.0 };
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        let (a, b, c) = (sign * y[i - 1], sign * y[i], sign * y[i + 1]);
        if b > a && b >= c {
            let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
            let d1 = (b - a) / (x1 - x0);
            let d2 = (c - b) / (x2 - x1);
            let curv = (d2 - d1) / (x2 - x0);
            if curv < 0.0 {
                // vertex of the parabola through the three samples
                let xv = (0.5 * (x0 + x1) - d1 / (2.0 * curv)).clamp(x0, x2);
                let yv = a + d1 * (xv - x0) + curv * (xv - x0) * (xv - x1);
                out.push((xv, sign * yv));
            } else {
                out.push((x1, sign * b));
            }
        }
    }
    out
}
