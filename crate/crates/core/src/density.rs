//! Inhomogeneous spectral densities `rho(omega)` of the emitter ensemble.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Distance from `q = 1` below which a q-Gaussian is treated as a Gaussian.
pub const Q_GAUSSIAN_LIMIT_TOL: f64 = 1e-9;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_286_948_079_451_560_772_6;

/// Lineshape family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityKind {
    Lorentzian,
    Gaussian,
    /// `[1 + (q-1) x^2 / width^2]^(-1/(q-1))`, with `1 < q < 2`.
    QGaussian { q: f64 },
    /// Two equal-weight Gaussians centred at `center -/+ half_splitting`.
    DoubleGaussian { half_splitting: f64 },
}

/// Normalized ensemble lineshape. Frequencies in rad/ns, density in ns/rad.
///
/// `width` is the `Delta` of each family: Lorentzian half width at half
/// maximum, Gaussian `exp(-x^2 / Delta^2)` scale, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub kind: DensityKind,
    pub center: f64,
    pub width: f64,
}

impl SpectralDensity {
    pub fn lorentzian(center: f64, width: f64) -> Result<Self> {
        Self::new(DensityKind::Lorentzian, center, width)
    }

    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        Self::new(DensityKind::Gaussian, center, width)
    }

    /// q-Gaussian; `q` within [`Q_GAUSSIAN_LIMIT_TOL`] of 1 yields the
    /// Gaussian limit, `q >= 2` is not normalizable and `q < 1` is rejected.
    pub fn q_gaussian(center: f64, width: f64, q: f64) -> Result<Self> {
        if (q - 1.0).abs() <= Q_GAUSSIAN_LIMIT_TOL {
            return Self::gaussian(center, width);
        }
        Self::new(DensityKind::QGaussian { q }, center, width)
    }

    pub fn double_gaussian(center: f64, width: f64, half_splitting: f64) -> Result<Self> {
        Self::new(DensityKind::DoubleGaussian { half_splitting }, center, width)
    }

    pub fn new(kind: DensityKind, center: f64, width: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(invalid("center", "must be finite"));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid("width", format!("must be positive, got {width}")));
        }
        match kind {
            DensityKind::QGaussian { q } => {
                if !q.is_finite() || q < 1.0 - Q_GAUSSIAN_LIMIT_TOL {
                    return Err(invalid("q", format!("must satisfy 1 <= q < 2, got {q}")));
                }
                if q >= 2.0 {
                    return Err(invalid("q", format!("q >= 2 is not normalizable, got {q}")));
                }
                if (q - 1.0).abs() <= Q_GAUSSIAN_LIMIT_TOL {
                    return Ok(Self {
                        kind: DensityKind::Gaussian,
                        center,
                        width,
                    });
                }
            }
            DensityKind::DoubleGaussian { half_splitting } => {
                if !(half_splitting.is_finite() && half_splitting >= 0.0) {
                    return Err(invalid("half_splitting", "must be non-negative"));
                }
            }
            DensityKind::Lorentzian | DensityKind::Gaussian => {}
        }
        Ok(Self { kind, center, width })
    }

    /// The same lineshape with a different centre.
    pub fn recentered(self, center: f64) -> Self {
        Self { center, ..self }
    }

    /// `rho(omega)`.
    pub fn eval(&self, omega: f64) -> f64 {
        let x = omega - self.center;
        let d = self.width;
        match self.kind {
            DensityKind::Lorentzian => d / (PI * (d * d + x * x)),
            DensityKind::Gaussian => gaussian(x, d),
            DensityKind::QGaussian { q } => {
                let (norm, a, p) = q_gaussian_constants(q, d);
                norm * (1.0 + a * x * x).powf(-p)
            }
            DensityKind::DoubleGaussian { half_splitting } => {
                0.5 * (gaussian(x - half_splitting, d) + gaussian(x + half_splitting, d))
            }
        }
    }

    /// Analytic continuation of `rho` to complex frequency.
    pub fn eval_complex(&self, omega: Complex64) -> Complex64 {
        let x = omega - self.center;
        let d = self.width;
        let g = |u: Complex64| (-(u * u) / (d * d)).exp() * (FRAC_1_SQRT_PI / d);
        match self.kind {
            DensityKind::Lorentzian => d / (PI * (d * d + x * x)),
            DensityKind::Gaussian => g(x),
            DensityKind::QGaussian { q } => {
                let (norm, a, p) = q_gaussian_constants(q, d);
                norm * (1.0 + a * x * x).powf(-p)
            }
            DensityKind::DoubleGaussian { half_splitting } => {
                0.5 * (g(x - half_splitting) + g(x + half_splitting))
            }
        }
    }

    /// Full width at half maximum (rad/ns).
    pub fn fwhm(&self) -> f64 {
        let d = self.width;
        match self.kind {
            DensityKind::Lorentzian => 2.0 * d,
            DensityKind::Gaussian => 2.0 * 2f64.ln().sqrt() * d,
            DensityKind::QGaussian { q } => {
                2.0 * d * ((2f64.powf(q) - 2.0) / (2.0 * q - 2.0)).sqrt()
            }
            DensityKind::DoubleGaussian { half_splitting } => self.numeric_fwhm(half_splitting + 4.0 * d),
        }
    }

    // Outermost half-maximum crossings, for symmetric densities.
    fn numeric_fwhm(&self, reach: f64) -> f64 {
        let n = 4001;
        let peak = (0..n)
            .map(|i| self.eval(self.center + reach * i as f64 / (n - 1) as f64))
            .fold(0.0, f64::max);
        let half = 0.5 * peak;
        // bisection on the outer flank
        let (mut lo, mut hi) = (0.0, reach);
        let mut i = n - 1;
        while i > 0 {
            let x = reach * i as f64 / (n - 1) as f64;
            if self.eval(self.center + x) >= half {
                lo = x;
                hi = reach * (i + 1) as f64 / (n - 1) as f64;
                break;
            }
            i -= 1;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(self.center + mid) >= half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        2.0 * 0.5 * (lo + hi)
    }

    /// Cumulative distribution `integral_{-inf}^{omega} rho`.
    pub fn cdf(&self, omega: f64) -> f64 {
        let x = omega - self.center;
        let d = self.width;
        match self.kind {
            DensityKind::Lorentzian => 0.5 + (x / d).atan() / PI,
            DensityKind::Gaussian => 0.5 * erfc(-x / d),
            DensityKind::QGaussian { q } => {
                let (_, a, p) = q_gaussian_constants(q, d);
                let nu = 2.0 * p - 1.0;
                let t = StudentsT::new(0.0, 1.0, nu).expect("nu > 0 for q < 2");
                t.cdf(x * (nu * a).sqrt())
            }
            DensityKind::DoubleGaussian { half_splitting } => {
                0.25 * (erfc(-(x - half_splitting) / d) + erfc(-(x + half_splitting) / d))
            }
        }
    }

    /// Inverse of [`cdf`](Self::cdf) for `u` in `(0, 1)`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(1e-300, 1.0 - f64::EPSILON);
        if let DensityKind::Lorentzian = self.kind {
            return self.center + self.width * (PI * (u - 0.5)).tan();
        }
        let mut step = self.width + self.half_splitting();
        let (mut lo, mut hi) = (self.center - step, self.center + step);
        while self.cdf(lo) > u {
            step *= 2.0;
            lo = self.center - step;
        }
        while self.cdf(hi) < u {
            step *= 2.0;
            hi = self.center + step;
        }
        // safeguarded Newton inside a shrinking bracket
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.cdf(x) - u;
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let dens = self.eval(x);
            let newton = x - f / dens;
            let next = if dens > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 1e-15 * (x.abs() + self.width) {
                return next;
            }
            x = next;
        }
        x
    }

    pub fn half_splitting(&self) -> f64 {
        match self.kind {
            DensityKind::DoubleGaussian { half_splitting } => half_splitting,
            _ => 0.0,
        }
    }

    /// Half width of a window around the centre holding essentially all of
    /// the weight of light-tailed densities.
    pub fn support_half_width(&self) -> f64 {
        40.0 * self.width + self.half_splitting()
    }
}

fn gaussian(x: f64, d: f64) -> f64 {
    (-(x * x) / (d * d)).exp() * FRAC_1_SQRT_PI / d
}

/// `(normalization, a, p)` with `rho = norm (1 + a x^2)^(-p)`.
fn q_gaussian_constants(q: f64, d: f64) -> (f64, f64, f64) {
    let a = (q - 1.0) / (d * d);
    let p = 1.0 / (q - 1.0);
    let norm = (a / PI).sqrt() * (ln_gamma(p) - ln_gamma(p - 0.5)).exp();
    (norm, a, p)
}
