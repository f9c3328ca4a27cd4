//! Frequency-domain model: collective susceptibility, cavity transmission,
//! polariton poles and linewidths.
//!
//! Transmission of the two-sided cavity is
//!
//! ```text
//! t(w) = (i kappa / 2) / D(w),   D(w) = w0 - i kappa/2 - w + chi(w)
//! chi(w) = Omega^2 F(w + i gamma_h / 2),   F(z) = integral rho(x) dx / (z - x)
//! ```
//!
//! `F` is evaluated in closed form for Lorentzian, Gaussian and double
//! Gaussian densities and by adaptive quadrature otherwise. Poles of `t` live
//! in the lower half-plane, where `F` means its analytic continuation from
//! above.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::density::{DensityKind, SpectralDensity};
use crate::error::{invalid, Result};
use crate::faddeeva::{faddeeva, faddeeva_derivative};
use crate::params::SystemParams;
use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};
use crate::roots::{newton, NewtonOptions};

const I: Complex64 = Complex64::new(0.0, 1.0);
const SQRT_PI: f64 = 1.772_453_850_905_516_027_298_167_483_341_145;

/// `rho(omega)` of the given density.
pub fn spectral_density(d: &SpectralDensity, omega: f64) -> f64 {
    d.eval(omega)
}

fn quad_tol() -> Tolerance {
    Tolerance {
        abs: 1e-16,
        rel: 1e-12,
        max_intervals: 50_000,
    }
}

/// Cauchy transform `F(z) = integral rho(x) / (z - x) dx` by quadrature,
/// continued analytically from the upper half-plane when `Im z < 0`.
///
/// The pole at `x = Re z` is handled by subtracting `rho(Re z)` on a
/// symmetric window, whose kernel integral is known in closed form.
pub fn cauchy_transform_quadrature(d: &SpectralDensity, z: Complex64) -> Result<Complex64> {
    let x0 = z.re;
    let eps = z.im;
    let r = 10.0 * d.width + d.half_splitting();
    let rho0 = d.eval(x0);
    let tol = quad_tol();
    let mut breaks = vec![x0, d.center];
    if d.half_splitting() > 0.0 {
        breaks.push(d.center - d.half_splitting());
        breaks.push(d.center + d.half_splitting());
    }
    let inner = integrate(|x| (d.eval(x) - rho0) / (z - x), x0 - r, x0 + r, &breaks, tol)?;
    let kernel = if eps == 0.0 {
        Complex64::new(0.0, -PI)
    } else {
        Complex64::new(0.0, -2.0 * (r / eps).atan())
    };
    let right = integrate_to_infinity(|x| d.eval(x) / (z - x), x0 + r, tol)?;
    let left = integrate_to_infinity(|y| d.eval(2.0 * x0 - y) / (z - 2.0 * x0 + y), x0 + r, tol)?;
    let mut total = inner.value + rho0 * kernel + right.value + left.value;
    if eps < 0.0 {
        total -= 2.0 * PI * I * d.eval_complex(z);
    }
    Ok(total)
}

/// `(F(z), F'(z))` using the closed form where one exists.
fn cauchy_transform(d: &SpectralDensity, z: Complex64) -> Result<(Complex64, Complex64)> {
    let gaussian = |center: f64| {
        let u = (z - center) / d.width;
        let f = -I * SQRT_PI * faddeeva(u) / d.width;
        let df = -I * SQRT_PI * faddeeva_derivative(u) / (d.width * d.width);
        (f, df)
    };
    Ok(match d.kind {
        DensityKind::Lorentzian => {
            let f = 1.0 / (z - d.center + I * d.width);
            (f, -f * f)
        }
        DensityKind::Gaussian => gaussian(d.center),
        DensityKind::DoubleGaussian { half_splitting } => {
            let (f1, d1) = gaussian(d.center - half_splitting);
            let (f2, d2) = gaussian(d.center + half_splitting);
            (0.5 * (f1 + f2), 0.5 * (d1 + d2))
        }
        DensityKind::QGaussian { .. } => {
            let h = 1e-4 * d.width;
            let f = cauchy_transform_quadrature(d, z)?;
            let fp = cauchy_transform_quadrature(d, z + h)?;
            let fm = cauchy_transform_quadrature(d, z - h)?;
            (f, (fp - fm) / (2.0 * h))
        }
    })
}

/// Collective ensemble susceptibility `chi(omega)` at real frequency.
pub fn susceptibility(p: &SystemParams, omega: f64) -> Result<Complex64> {
    if !omega.is_finite() {
        return Err(invalid("omega", "must be finite"));
    }
    if p.coupling == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let z = Complex64::new(omega, 0.5 * p.gamma_h);
    let (f, _) = cauchy_transform(&p.density, z)?;
    Ok(p.coupling * p.coupling * f)
}

/// `chi(omega)` by direct quadrature for every density kind.
pub fn susceptibility_by_quadrature(p: &SystemParams, omega: f64) -> Result<Complex64> {
    let z = Complex64::new(omega, 0.5 * p.gamma_h);
    Ok(p.coupling * p.coupling * cauchy_transform_quadrature(&p.density, z)?)
}

/// Complex transmission amplitude `t(omega)`.
pub fn transmission(p: &SystemParams, omega: f64) -> Result<Complex64> {
    let chi = susceptibility(p, omega)?;
    let d = p.cavity_frequency - I * (0.5 * p.kappa) - omega + chi;
    Ok(I * (0.5 * p.kappa) / d)
}

/// `t(omega)` on a grid, evaluated in parallel; output order follows `grid`.
pub fn transmission_spectrum(p: &SystemParams, grid: &[f64]) -> Result<Vec<Complex64>> {
    grid.par_iter().map(|&w| transmission(p, w)).collect()
}

/// Transmission denominator `D(omega)` and `D'(omega)` at complex frequency.
pub fn denominator(p: &SystemParams, omega: Complex64) -> Result<(Complex64, Complex64)> {
    let base = p.cavity_frequency - I * (0.5 * p.kappa) - omega;
    if p.coupling == 0.0 {
        return Ok((base, Complex64::new(-1.0, 0.0)));
    }
    let (f, df) = cauchy_transform(&p.density, omega + I * (0.5 * p.gamma_h))?;
    let o2 = p.coupling * p.coupling;
    Ok((base + o2 * f, -1.0 + o2 * df))
}

/// The two polariton resonances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaritonPair {
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// Intensity linewidths (FWHM), `-2 Im(pole)`.
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// Poles closer than the root-separation tolerance.
    pub degenerate: bool,
}

impl PolaritonPair {
    fn from_poles(a: Complex64, b: Complex64, scale: f64) -> Self {
        let (lo, hi) = order_by_real(a, b);
        Self {
            omega_plus: hi.re,
            omega_minus: lo.re,
            gamma_plus: -2.0 * hi.im,
            gamma_minus: -2.0 * lo.im,
            degenerate: (a - b).norm() < 1e-6 * scale,
        }
    }

    pub fn pole_plus(&self) -> Complex64 {
        Complex64::new(self.omega_plus, -0.5 * self.gamma_plus)
    }

    pub fn pole_minus(&self) -> Complex64 {
        Complex64::new(self.omega_minus, -0.5 * self.gamma_minus)
    }

    /// `Omega_R = omega_+ - omega_-`.
    pub fn rabi_splitting(&self) -> f64 {
        self.omega_plus - self.omega_minus
    }

    /// `tau_R = 2 pi / Omega_R` in ns.
    pub fn rabi_period(&self) -> f64 {
        2.0 * PI / self.rabi_splitting()
    }
}

fn order_by_real(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    if a.re < b.re || (a.re == b.re && a.im > b.im) {
        (a, b)
    } else {
        (b, a)
    }
}

fn frequency_scale(p: &SystemParams) -> f64 {
    p.kappa + p.coupling + p.density.width + p.density.half_splitting() + p.detuning().abs()
}

/// Closed-form poles of the Lorentzian-ensemble transmission, using the
/// density's centre and `width` as the Lorentzian half width.
pub fn lorentzian_poles(p: &SystemParams) -> [Complex64; 2] {
    let delta = p.detuning();
    let width = p.density.width;
    let damping = (p.kappa + p.gamma_h + 2.0 * width) / 4.0;
    let inner = (I * p.kappa - 2.0 * I * width - I * p.gamma_h - 2.0 * delta) / 4.0;
    let root = (p.coupling * p.coupling + inner * inner).sqrt();
    let mid = Complex64::new(p.density.center + 0.5 * delta, -damping);
    [mid + root, mid - root]
}

fn newton_options(p: &SystemParams) -> NewtonOptions {
    let scale = frequency_scale(p) + p.density.center.abs();
    NewtonOptions {
        max_iterations: 200,
        residual_tol: 1e-9 * p.kappa,
        step_tol: 1e-12 * scale,
    }
}

/// Refines two poles of `t` by Newton iteration from the given seeds.
pub fn solve_poles(p: &SystemParams, seeds: [Complex64; 2]) -> Result<[Complex64; 2]> {
    let opts = newton_options(p);
    let a = newton(|w| denominator(p, w), seeds[0], opts)?;
    let b = newton(|w| denominator(p, w), seeds[1], opts)?;
    Ok([a, b])
}

fn plausible(p: &SystemParams, roots: &[Complex64; 2]) -> bool {
    let scale = frequency_scale(p);
    roots.iter().all(|r| r.im < 0.0) && (roots[0] - roots[1]).norm() > 1e-6 * scale
}

/// Polariton frequencies and linewidths at cavity-ensemble detuning `detuning`.
///
/// Lorentzian ensembles use the closed form. Other shapes are solved by
/// Newton iteration seeded from the Lorentzian poles with the same width,
/// falling back to the fully protected (zero-width) poles if that fails, and
/// followed in detuning from resonance.
pub fn polariton_modes(p: &SystemParams, detuning: f64) -> Result<PolaritonPair> {
    p.validate()?;
    let p = p.with_detuning(detuning);
    let scale = frequency_scale(&p);
    if let DensityKind::Lorentzian = p.density.kind {
        let [a, b] = lorentzian_poles(&p);
        return Ok(PolaritonPair::from_poles(a, b, scale));
    }
    let roots = continued_poles(&p)?;
    Ok(PolaritonPair::from_poles(roots[0], roots[1], scale))
}

/// Poles at `p`'s detuning, followed from resonance in small detuning steps.
/// Seeding directly at large detuning can land on a deeper root of the
/// continued transform that is not connected to the polaritons.
fn continued_poles(p: &SystemParams) -> Result<[Complex64; 2]> {
    let target = p.detuning();
    let start = p.with_detuning(0.0);
    let step = frequency_scale(&start) / 64.0;
    let n = (target.abs() / step).ceil() as usize;
    let mut roots = find_poles(&start, None)?;
    for i in 1..=n {
        roots = find_poles(&p.with_detuning(target * i as f64 / n as f64), Some(roots))?;
    }
    Ok(roots)
}

fn find_poles(p: &SystemParams, hint: Option<[Complex64; 2]>) -> Result<[Complex64; 2]> {
    let mut first_err = None;
    let protected = p.with_density(SpectralDensity {
        width: 1e-9 * p.density.width,
        ..p.density
    });
    let mut candidates = Vec::with_capacity(3);
    if let Some(h) = hint {
        candidates.push(h);
    }
    candidates.push(lorentzian_poles(p));
    candidates.push(lorentzian_poles(&protected));
    if let DensityKind::DoubleGaussian { half_splitting } = p.density.kind {
        // far from resonance the atom-like root sits on one sub-ensemble;
        // try the one nearer the cavity first so the choice mirrors with detuning
        let toward = if p.cavity_frequency >= p.density.center { 1.0 } else { -1.0 };
        for base in [lorentzian_poles(p), lorentzian_poles(&protected)] {
            for sign in [toward, -toward] {
                let mut seeds = base;
                let atom = if (seeds[0].re - p.density.center).abs() < (seeds[1].re - p.density.center).abs() { 0 } else { 1 };
                seeds[atom] += sign * half_splitting;
                candidates.push(seeds);
            }
        }
    }
    for seeds in candidates {
        match solve_poles(p, seeds) {
            Ok(r) if plausible(p, &r) => return Ok(r),
            Ok(_) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or_else(|| {
        invalid(
            "poles",
            "root finder converged to coincident or non-decaying roots from every seed",
        )
    }))
}

/// How linewidths are extracted in [`linewidth_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinewidthMethod {
    Poles,
    /// Half-maximum widths of `|t|^2` sampled on `points` frequencies.
    FwhmOfSpectrum { points: usize },
}

impl LinewidthMethod {
    pub const DEFAULT_SPECTRUM_POINTS: usize = 4096;

    pub fn fwhm_default() -> Self {
        Self::FwhmOfSpectrum {
            points: Self::DEFAULT_SPECTRUM_POINTS,
        }
    }
}

/// One detuning of a linewidth sweep (rad/ns). Missing entries mean the
/// spectrum did not show a resolvable peak or half-maximum crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub detuning: f64,
    pub gamma_plus: Option<f64>,
    pub gamma_minus: Option<f64>,
    pub omega_plus: Option<f64>,
    pub omega_minus: Option<f64>,
    /// Any maximum strictly between the two polaritons.
    pub middle_peak: Option<f64>,
}

/// Polariton linewidths and positions over a detuning grid, ordered by
/// detuning.
///
/// With `Poles`, each detuning is seeded from the previous one. Above
/// `Omega >= kappa / 4` the labels follow the real part; below it they follow
/// the continuation in detuning, so `omega_plus < omega_minus` is possible.
pub fn linewidth_sweep(
    p: &SystemParams,
    detunings: &[f64],
    method: LinewidthMethod,
) -> Result<Vec<SweepRow>> {
    p.validate()?;
    if let Some(bad) = detunings.iter().find(|d| !d.is_finite()) {
        return Err(invalid("detuning", format!("must be finite, got {bad}")));
    }
    let mut grid = detunings.to_vec();
    grid.sort_by(f64::total_cmp);
    match method {
        LinewidthMethod::Poles => pole_sweep(p, &grid),
        LinewidthMethod::FwhmOfSpectrum { points } => {
            if points < 16 {
                return Err(invalid("points", "spectral grid needs at least 16 points"));
            }
            grid.par_iter()
                .map(|&d| spectrum_row(&p.with_detuning(d), points))
                .collect()
        }
    }
}

fn pole_sweep(p: &SystemParams, grid: &[f64]) -> Result<Vec<SweepRow>> {
    let weak = p.coupling < 0.25 * p.kappa;
    // (minus, plus) under the current labelling
    let mut previous: Option<[Complex64; 2]> = None;
    let mut rows = Vec::with_capacity(grid.len());
    for &delta in grid {
        let q = p.with_detuning(delta);
        let raw = match q.density.kind {
            DensityKind::Lorentzian => lorentzian_poles(&q),
            _ => match previous {
                Some(_) => find_poles(&q, previous)?,
                None => continued_poles(&q)?,
            },
        };
        let labelled = match (weak, previous) {
            (true, Some([pm, pp])) => {
                let direct = (raw[0] - pm).norm() + (raw[1] - pp).norm();
                let swapped = (raw[1] - pm).norm() + (raw[0] - pp).norm();
                if direct <= swapped {
                    raw
                } else {
                    [raw[1], raw[0]]
                }
            }
            _ => {
                let (lo, hi) = order_by_real(raw[0], raw[1]);
                [lo, hi]
            }
        };
        rows.push(SweepRow {
            detuning: delta,
            gamma_plus: Some(-2.0 * labelled[1].im),
            gamma_minus: Some(-2.0 * labelled[0].im),
            omega_plus: Some(labelled[1].re),
            omega_minus: Some(labelled[0].re),
            middle_peak: None,
        });
        previous = Some(labelled);
    }
    Ok(rows)
}

/// A local maximum of `|t|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub omega: f64,
    pub height: f64,
    pub fwhm: Option<f64>,
}

/// Default sampling window: `omega_a +/- (3 Omega + 3 kappa)`, widened to
/// keep `omega_0 +/- 3 kappa` inside.
pub fn default_window(p: &SystemParams) -> (f64, f64) {
    let wa = p.density.center;
    let reach = 3.0 * p.coupling + 3.0 * p.kappa + p.density.half_splitting();
    let lo = (wa - reach).min(p.cavity_frequency - 3.0 * p.kappa);
    let hi = (wa + reach).max(p.cavity_frequency + 3.0 * p.kappa);
    (lo, hi)
}

/// Uniform grid of `n` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Local maxima of `|t|^2` on `grid` (uniform, ascending), with half-maximum
/// widths. Maxima below `1e-4` of the tallest are ignored.
pub fn spectrum_peaks(p: &SystemParams, grid: &[f64]) -> Result<Vec<SpectralPeak>> {
    let power: Vec<f64> = transmission_spectrum(p, grid)?
        .into_iter()
        .map(|t| t.norm_sqr())
        .collect();
    Ok(find_peaks(grid, &power))
}

fn find_peaks(grid: &[f64], power: &[f64]) -> Vec<SpectralPeak> {
    let n = power.len();
    if n < 3 {
        return Vec::new();
    }
    let tallest = power.iter().copied().fold(0.0, f64::max);
    let h = grid[1] - grid[0];
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if power[i] > power[i - 1] && power[i] >= power[i + 1] && power[i] >= 1e-4 * tallest {
            // vertex of the parabola through the three samples
            let (a, b, c) = (power[i - 1], power[i], power[i + 1]);
            let curv = a - 2.0 * b + c;
            let (offset, height) = if curv < 0.0 {
                let o = 0.5 * (a - c) / curv;
                (o, b - 0.25 * (a - c) * o)
            } else {
                (0.0, b)
            };
            let half = 0.5 * height;
            let right = half_crossing(grid, power, i, half, 1);
            let left = half_crossing(grid, power, i, half, -1);
            let center = grid[i] + offset * h;
            let fwhm = match (left, right) {
                (Some(l), Some(r)) => Some(r - l),
                (Some(l), None) => Some(2.0 * (center - l)),
                (None, Some(r)) => Some(2.0 * (r - center)),
                (None, None) => None,
            };
            peaks.push(SpectralPeak {
                omega: center,
                height,
                fwhm,
            });
        }
    }
    peaks
}

// Walks from peak `i` in direction `dir` to the first sample below `half`;
// gives up at a local minimum that stays above `half` or at the grid edge.
fn half_crossing(grid: &[f64], power: &[f64], i: usize, half: f64, dir: isize) -> Option<f64> {
    let n = power.len() as isize;
    let mut j = i as isize;
    loop {
        let next = j + dir;
        if next < 0 || next >= n {
            return None;
        }
        let (pj, pn) = (power[j as usize], power[next as usize]);
        if pn < half {
            return Some(interpolate_level(grid, power, j as usize, next as usize, half));
        }
        if pn > pj {
            return None;
        }
        j = next;
    }
}

// Level crossing between adjacent samples `a` (above) and `b` (below), from
// the quadratic through `a`, `b` and the sample beyond `b` when available.
fn interpolate_level(grid: &[f64], power: &[f64], a: usize, b: usize, level: f64) -> f64 {
    let linear = {
        let t = (power[a] - level) / (power[a] - power[b]);
        grid[a] + t * (grid[b] - grid[a])
    };
    let c = if b > a { b + 1 } else { b.wrapping_sub(1) };
    if c >= power.len() {
        return linear;
    }
    // quadratic in local coordinate s, samples at s = 0, 1, 2
    let (y0, y1, y2) = (power[a] - level, power[b] - level, power[c] - level);
    let qa = 0.5 * (y0 - 2.0 * y1 + y2);
    let qb = y1 - y0 - qa;
    let qc = y0;
    let s = if qa.abs() < 1e-14 * (y0.abs() + y1.abs()) {
        -qc / qb
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return linear;
        }
        let sq = disc.sqrt();
        let r1 = (-qb + sq) / (2.0 * qa);
        let r2 = (-qb - sq) / (2.0 * qa);
        match (0.0..=1.0).contains(&r1) {
            true => r1,
            false if (0.0..=1.0).contains(&r2) => r2,
            false => return linear,
        }
    };
    grid[a] + s * (grid[b] - grid[a])
}

fn spectrum_row(p: &SystemParams, points: usize) -> Result<SweepRow> {
    let (lo, hi) = default_window(p);
    let grid = linspace(lo, hi, points);
    let peaks = spectrum_peaks(p, &grid)?;
    let wa = p.density.center;
    let mut row = SweepRow {
        detuning: p.detuning(),
        gamma_plus: None,
        gamma_minus: None,
        omega_plus: None,
        omega_minus: None,
        middle_peak: None,
    };
    match peaks.len() {
        0 => {}
        1 => {
            let pk = peaks[0];
            if pk.omega >= wa {
                row.omega_plus = Some(pk.omega);
                row.gamma_plus = pk.fwhm;
            } else {
                row.omega_minus = Some(pk.omega);
                row.gamma_minus = pk.fwhm;
            }
        }
        n => {
            let (first, last) = (peaks[0], peaks[n - 1]);
            row.omega_minus = Some(first.omega);
            row.gamma_minus = first.fwhm;
            row.omega_plus = Some(last.omega);
            row.gamma_plus = last.fwhm;
            row.middle_peak = peaks[1..n - 1]
                .iter()
                .max_by(|a, b| a.height.total_cmp(&b.height))
                .map(|pk| pk.omega);
        }
    }
    Ok(row)
}

/// Residual inhomogeneous broadening `pi Omega^2 rho(omega_a + Omega)` of
/// the on-resonance polaritons.
pub fn protection_residual(p: &SystemParams) -> f64 {
    PI * p.coupling * p.coupling * p.density.eval(p.density.center + p.coupling)
}

/// Strong-coupling linewidth prediction `kappa/2 + gamma_h + residual`.
pub fn protected_linewidth(p: &SystemParams) -> f64 {
    0.5 * p.kappa + p.gamma_h + protection_residual(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Preset;
    use crate::units::{ghz_to_rad_per_ns as ghz, rad_per_ns_to_ghz};

    fn lorentz01() -> SystemParams {
        let p = Preset::NdYvo01Gaussian.params();
        p.with_density(SpectralDensity::lorentzian(0.0, p.density.width).unwrap())
    }

    #[test]
    fn empty_ensemble_has_no_susceptibility() {
        let p = Preset::NdYvo01Gaussian.params().with_coupling(0.0);
        for &w in &[-100.0, 0.0, 37.0] {
            assert_eq!(susceptibility(&p, w).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn bare_cavity_on_resonance_transmits_fully() {
        let p = Preset::NdYvo01Gaussian.params().with_coupling(0.0).with_detuning(3.0);
        let t = transmission(&p, 3.0).unwrap();
        assert!((t + 1.0).norm() < 1e-15);
    }

    #[test]
    fn lorentzian_susceptibility_at_center_is_imaginary() {
        let p = lorentz01();
        let chi = susceptibility(&p, 0.0).unwrap();
        let expected = p.coupling.powi(2) / (I * (0.5 * p.gamma_h + p.density.width));
        assert!((chi - expected).norm() < 1e-12 * expected.norm());
        assert!(chi.re.abs() < 1e-12 * chi.im.abs());
    }

    #[test]
    fn quadrature_route_matches_closed_forms() {
        let base = Preset::NdYvo01Gaussian.params();
        let densities = [
            base.density,
            SpectralDensity::lorentzian(0.0, base.density.width).unwrap(),
            Preset::NdYvo01DoubleGaussian.params().density,
        ];
        for d in densities {
            let p = base.with_density(d);
            for k in 0..21 {
                let w = d.width * (-5.0 + 0.5 * k as f64);
                let a = susceptibility(&p, w).unwrap();
                let b = susceptibility_by_quadrature(&p, w).unwrap();
                assert!((a - b).norm() < 1e-8 * a.norm(), "{:?} w={w}: {a} vs {b}", d.kind);
            }
        }
    }

    #[test]
    fn continuation_below_axis_matches_closed_form() {
        let p = Preset::NdYvo01Gaussian.params();
        let z = Complex64::new(ghz(27.0), -ghz(8.0));
        let quad = cauchy_transform_quadrature(&p.density, z).unwrap();
        let (closed, _) = cauchy_transform(&p.density, z).unwrap();
        assert!((quad - closed).norm() < 1e-9 * closed.norm());
    }

    #[test]
    fn lorentzian_closed_form_limits() {
        let p = lorentz01();
        // on resonance, Omega >> kappa, Delta
        let strong = p.with_coupling(ghz(5000.0));
        let pair = polariton_modes(&strong, 0.0).unwrap();
        let limit = 0.5 * (p.kappa + p.gamma_h + 2.0 * p.density.width);
        assert!((pair.gamma_plus - limit).abs() < 1e-3 * limit);
        assert!((pair.gamma_minus - limit).abs() < 1e-3 * limit);

        // far detuned: cavity-like -> kappa, atom-like -> gamma_h + 2 Delta
        let far = polariton_modes(&p, 100.0 * p.coupling).unwrap();
        let cavity = far.gamma_plus;
        let atom = far.gamma_minus;
        assert!((cavity - p.kappa).abs() < 1e-3 * p.kappa, "{cavity}");
        let atom_limit = p.gamma_h + 2.0 * p.density.width;
        assert!((atom - atom_limit).abs() < 1e-3 * atom_limit, "{atom}");
    }

    #[test]
    fn gaussian_poles_have_small_residual() {
        let p = Preset::NdYvo01Gaussian.params();
        let pair = polariton_modes(&p, 0.0).unwrap();
        for pole in [pair.pole_plus(), pair.pole_minus()] {
            let (d, _) = denominator(&p, pole).unwrap();
            assert!(d.norm() < 1e-9 * p.kappa);
        }
        assert!(pair.omega_plus > pair.omega_minus);
        assert!(pair.gamma_plus > 0.0 && pair.rabi_period() > 0.0);
        assert!(!pair.degenerate);
    }

    #[test]
    fn q_gaussian_poles_close_to_gaussian() {
        let base = Preset::NdYvo01Gaussian.params();
        let q = base.with_density(SpectralDensity::q_gaussian(0.0, base.density.width, 1.01).unwrap());
        let pg = polariton_modes(&base, 0.0).unwrap();
        let pq = polariton_modes(&q, 0.0).unwrap();
        let (d, _) = denominator(&q, pq.pole_plus()).unwrap();
        assert!(d.norm() < 1e-9 * q.kappa);
        assert!((pq.omega_plus - pg.omega_plus).abs() < 0.05 * pg.omega_plus);
    }

    #[test]
    fn lorentzian_exceptional_point_is_flagged() {
        // kappa = 2 Delta + gamma_h and 2 Omega = |kappa - 2 Delta - gamma_h| / 2 = 0 at delta = 0
        let d = SpectralDensity::lorentzian(0.0, 1.0).unwrap();
        let p = SystemParams::new(2.0, 0.0, 0.0, 0.0, d).unwrap();
        let pair = polariton_modes(&p, 0.0).unwrap();
        assert!(pair.degenerate);
    }

    #[test]
    fn residual_limits() {
        let p = Preset::NdYvo01Gaussian.params();
        let huge = p.with_coupling(20.0 * p.density.width);
        assert!(protection_residual(&huge) < 1e-100);
        let l = lorentz01();
        let expected = l.density.width * l.coupling.powi(2) / (l.density.width.powi(2) + l.coupling.powi(2));
        assert!((protection_residual(&l) - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn sweep_rows_are_sorted() {
        let p = Preset::NdYvo01Gaussian.params();
        let rows = linewidth_sweep(&p, &[30.0, -10.0, 0.0], LinewidthMethod::Poles).unwrap();
        let d: Vec<f64> = rows.iter().map(|r| r.detuning).collect();
        assert_eq!(d, vec![-10.0, 0.0, 30.0]);
    }

    #[test]
    fn fwhm_of_bare_cavity_is_kappa() {
        let p = Preset::NdYvo01Gaussian.params().with_coupling(0.0);
        let rows = linewidth_sweep(&p, &[0.0], LinewidthMethod::fwhm_default()).unwrap();
        let g = rows[0].gamma_plus.unwrap();
        let (lo, hi) = default_window(&p);
        let spacing = (hi - lo) / 4095.0;
        assert!((g - p.kappa).abs() < spacing, "{} GHz", rad_per_ns_to_ghz(g));
    }

    #[test]
    fn rejects_non_finite_detuning() {
        let p = Preset::NdYvo01Gaussian.params();
        assert!(linewidth_sweep(&p, &[f64::NAN], LinewidthMethod::Poles).is_err());
        assert!(susceptibility(&p, f64::INFINITY).is_err());
    }
}
