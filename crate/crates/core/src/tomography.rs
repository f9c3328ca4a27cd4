//! Frequency-bin qubit tomography from two-pulse fringe amplitudes.
//!
//! `|0>` is the lower polariton, `|1>` the upper one. Pauli matrices are
//! `sigma_1 = X`, `sigma_2 = Y`, `sigma_3 = Z = diag(1, -1)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{fringe_scan, EmitterBath};
use crate::error::{invalid, Error, Result};
use crate::params::SystemParams;
use crate::pulse::{PulseFilter, PulsePair};

type C = Complex64;

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    /// Amplitude on the lower polariton.
    pub alpha: C,
    /// Amplitude on the upper polariton.
    pub beta: C,
}

impl QubitState {
    pub fn new(alpha: C, beta: C) -> Result<Self> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if !((n - 1.0).abs() <= NORM_TOL) {
            return Err(invalid("qubit", format!("|alpha|^2 + |beta|^2 = {n}, expected 1")));
        }
        Ok(Self { alpha, beta })
    }

    /// Rescales to unit norm.
    pub fn normalized(alpha: C, beta: C) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(invalid("qubit", "amplitudes must not both vanish"));
        }
        Ok(Self {
            alpha: alpha / n,
            beta: beta / n,
        })
    }

    /// Pure state at polar angle `theta` and azimuth `phi` on the Bloch sphere.
    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        Self {
            alpha: C::new((0.5 * theta).cos(), 0.0),
            beta: C::from_polar((0.5 * theta).sin(), phi),
        }
    }

    pub fn zero() -> Self {
        Self::from_bloch(0.0, 0.0)
    }

    pub fn plus() -> Self {
        Self::from_bloch(0.5 * PI, 0.0)
    }

    /// `(|0> + i|1>) / sqrt 2`.
    pub fn circular() -> Self {
        Self::from_bloch(0.5 * PI, 0.5 * PI)
    }

    /// `<other|self>`.
    pub fn overlap(&self, other: &QubitState) -> C {
        self.alpha * other.alpha.conj() + self.beta * other.beta.conj()
    }

    pub fn projector(&self) -> DensityMatrix2 {
        let v = nalgebra::Vector2::new(self.alpha, self.beta);
        DensityMatrix2(v * v.adjoint())
    }
}

/// Detected counts versus the relative carrier phase when the stored qubit
/// `psi1` interferes with the probe `psi2`, with `Omega_R tau_R = 2 pi`.
pub fn count_rate(psi1: &QubitState, psi2: &QubitState, phi: f64) -> f64 {
    2.0 + 2.0 * phi.cos() * psi1.overlap(psi2).norm()
}

/// Fringe amplitudes for the four probe states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeAmplitudeSet {
    /// Probe `psi1 / sqrt 2`.
    pub a0: f64,
    /// Probe `|+>`.
    pub a1: f64,
    /// Probe `(|0> + i|1>) / sqrt 2`.
    pub a2: f64,
    /// Probe `|0>`.
    pub a3: f64,
    pub c0: f64,
}

impl FringeAmplitudeSet {
    pub fn as_array(&self) -> [f64; 4] {
        [self.a0, self.a1, self.a2, self.a3]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            a0: c * self.a0,
            a1: c * self.a1,
            a2: c * self.a2,
            a3: c * self.a3,
            c0: c * self.c0,
        }
    }
}

/// Ideal fringe amplitudes of the qubit `psi1`.
pub fn tomography_amplitudes(psi1: &QubitState, c0: f64) -> FringeAmplitudeSet {
    let i = C::new(0.0, 1.0);
    FringeAmplitudeSet {
        a0: c0 * FRAC_1_SQRT_2,
        a1: c0 * FRAC_1_SQRT_2 * (psi1.alpha + psi1.beta).norm(),
        a2: c0 * FRAC_1_SQRT_2 * (psi1.alpha - i * psi1.beta).norm(),
        a3: c0 * psi1.alpha.norm(),
        c0,
    }
}

/// Hermitian unit-trace 2x2 matrix. Not necessarily positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2(pub Matrix2<C>);

impl DensityMatrix2 {
    /// `(I + r . sigma) / 2`.
    pub fn from_bloch(r: [f64; 3]) -> Self {
        let h = 0.5;
        DensityMatrix2(Matrix2::new(
            C::new(h * (1.0 + r[2]), 0.0),
            C::new(h * r[0], -h * r[1]),
            C::new(h * r[0], h * r[1]),
            C::new(h * (1.0 - r[2]), 0.0),
        ))
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        let m = &self.0;
        [
            m[(0, 1)].re + m[(1, 0)].re,
            m[(1, 0)].im - m[(0, 1)].im,
            (m[(0, 0)] - m[(1, 1)]).re,
        ]
    }

    pub fn trace(&self) -> C {
        self.0.trace()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self.0 - self.0.adjoint()).iter().all(|z| z.norm() <= tol)
    }

    /// Eigenvalues in ascending order (Hermitian part).
    pub fn eigenvalues(&self) -> [f64; 2] {
        let tr = self.trace().re;
        let r = self.bloch_vector();
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        [0.5 * (tr - len), 0.5 * (tr + len)]
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && (self.trace().re - 1.0).abs() <= tol && self.eigenvalues()[0] >= -tol
    }

    /// `0.5 * || a - b ||_1`.
    pub fn trace_distance(&self, other: &DensityMatrix2) -> f64 {
        let (a, b) = (self.bloch_vector(), other.bloch_vector());
        0.5 * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }
}

/// Linear reconstruction from fringe amplitudes.
pub fn density_matrix(a: &FringeAmplitudeSet) -> Result<DensityMatrix2> {
    let vals = a.as_array();
    if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("amplitudes", "must be finite and non-negative"));
    }
    if a.a0 <= 0.0 {
        return Err(invalid("a0", "must be positive"));
    }
    let s = |x: f64| (x / a.a0).powi(2) - 1.0;
    Ok(DensityMatrix2::from_bloch([s(a.a1), s(a.a2), s(a.a3)]))
}

/// Cost minimized by [`mle_project`]: squared difference of the predicted
/// and measured `(A_j / A_0)^2` ratios, i.e. the squared Bloch distance.
pub fn mle_cost(candidate: &DensityMatrix2, raw: &DensityMatrix2) -> f64 {
    let (a, b) = (candidate.bloch_vector(), raw.bloch_vector());
    (0..3).map(|j| (a[j] - b[j]).powi(2)).sum()
}

/// `rho = T^dag T / tr` with `T = [[t0, 0], [t2 + i t3, t1]]`.
fn from_factor(t: &[f64; 4]) -> DensityMatrix2 {
    let tm = Matrix2::new(C::new(t[0], 0.0), C::new(0.0, 0.0), C::new(t[2], t[3]), C::new(t[1], 0.0));
    let m = tm.adjoint() * tm;
    let tr = m.trace().re;
    DensityMatrix2(m / C::new(tr, 0.0))
}

fn to_factor(rho: &DensityMatrix2) -> [f64; 4] {
    let m = &rho.0;
    let b = m[(1, 1)].re.max(0.0).sqrt();
    let c = if b > 1e-12 { m[(1, 0)] / b } else { C::new(0.0, 0.0) };
    let a = (m[(0, 0)].re - c.norm_sqr()).max(0.0).sqrt();
    [a, b, c.re, c.im]
}

/// Nearest physical state in the sense of [`mle_cost`].
///
/// Nelder-Mead over the Cholesky-like factor, started from `rho_raw` with
/// its negative eigenvalue clipped.
pub fn mle_project(rho_raw: &DensityMatrix2) -> Result<DensityMatrix2> {
    if !rho_raw.is_hermitian(1e-9) || (rho_raw.trace().re - 1.0).abs() > 1e-9 {
        return Err(invalid("rho_raw", "must be Hermitian with unit trace"));
    }
    let r = rho_raw.bloch_vector();
    let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let start = if len > 1.0 {
        DensityMatrix2::from_bloch([r[0] / len, r[1] / len, r[2] / len])
    } else {
        *rho_raw
    };
    let cost = |t: &[f64; 4]| {
        let n: f64 = t.iter().map(|x| x * x).sum();
        if n < 1e-300 {
            return f64::INFINITY;
        }
        mle_cost(&from_factor(t), rho_raw)
    };
    let x0 = to_factor(&start);
    let best = nelder_mead(cost, x0, 0.05, 1e-15, 20_000)?;
    Ok(from_factor(&best))
}

fn nelder_mead<F: Fn(&[f64; 4]) -> f64>(f: F, x0: [f64; 4], step: f64, ftol: f64, max_iter: usize) -> Result<[f64; 4]> {
    let mut simplex: Vec<([f64; 4], f64)> = Vec::with_capacity(5);
    simplex.push((x0, f(&x0)));
    for i in 0..4 {
        let mut x = x0;
        x[i] += step;
        simplex.push((x, f(&x)));
    }
    let comb = |a: &[f64; 4], b: &[f64; 4], t: f64| -> [f64; 4] {
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = a[k] + t * (b[k] - a[k]);
        }
        out
    };
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[4].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| (0..4).map(|k| (x[k] - simplex[0].0[k]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= ftol * (1.0 + simplex[0].1.abs()) && size < 1e-9 {
            return Ok(simplex[0].0);
        }
        let mut centroid = [0.0; 4];
        for (x, _) in &simplex[..4] {
            for k in 0..4 {
                centroid[k] += 0.25 * x[k];
            }
        }
        let worst = simplex[4];
        let refl = comb(&centroid, &worst.0, -1.0);
        let fr = f(&refl);
        if fr < simplex[0].1 {
            let exp = comb(&centroid, &worst.0, -2.0);
            let fe = f(&exp);
            simplex[4] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[3].1 {
            simplex[4] = (refl, fr);
        } else {
            let (target, ft) = if fr < worst.1 { (refl, fr) } else { (worst.0, worst.1) };
            let con = comb(&centroid, &target, 0.5);
            let fc = f(&con);
            if fc < ft {
                simplex[4] = (con, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    v.0 = comb(&best, &v.0, 0.5);
                    v.1 = f(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Err(Error::OptimizerNonConvergence {
        iterations: max_iter,
        cost: simplex[0].1,
    })
}

/// `<psi| rho |psi>`, clamped to `[0, 1]`.
pub fn fidelity(psi: &QubitState, rho: &DensityMatrix2) -> f64 {
    let v = nalgebra::Vector2::new(psi.alpha, psi.beta);
    (v.adjoint() * rho.0 * v)[(0, 0)].re.clamp(0.0, 1.0)
}

/// A pulse shape standing for a qubit state in the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseEncoding {
    pub filter: PulseFilter,
    pub amplitude: f64,
}

impl PulseEncoding {
    /// `|0>`: the lower-polariton band. A pulse covering both bands with unit
    /// weight carries `|0> + |1>`, hence the `sqrt 2`.
    pub fn zero() -> Self {
        Self {
            filter: PulseFilter::BandpassLower,
            amplitude: 2f64.sqrt(),
        }
    }

    /// `|+>`: both polariton bands of a transform-limited pulse.
    pub fn plus() -> Self {
        Self {
            filter: PulseFilter::Bins {
                alpha: C::new(1.0, 0.0),
                beta: C::new(1.0, 0.0),
            },
            amplitude: 1.0,
        }
    }

    /// `|0> + e^{i phase}|1>` prepared with an etalon of phase step `phase`.
    pub fn chirped(phase: f64) -> Self {
        Self {
            filter: PulseFilter::ChirpedBins { phase },
            amplitude: 1.0,
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Self {
            amplitude: c * self.amplitude,
            ..self
        }
    }
}

/// Storage delay at which the two frequency bins rephase: the maximum of
/// `A(|+>, |+>) / (A(|+>, |0>) + A(|+>, |1>))`, which is 1 for perfect
/// rephasing, searched by golden section in `[lo, hi]` (ns).
pub fn rephasing_delay(p: &SystemParams, bath: &EmitterBath, width: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(invalid("delay bracket", "need 0 < lo < hi"));
    }
    let plus = PulseEncoding::plus();
    let one = PulseEncoding {
        filter: PulseFilter::BandpassUpper,
        amplitude: 2f64.sqrt(),
    };
    let amp = |probe: PulseEncoding, delay: f64| -> Result<f64> {
        let pair = PulsePair {
            first: plus.filter,
            first_amplitude: plus.amplitude,
            second: probe.filter,
            second_amplitude: probe.amplitude,
            ..PulsePair::new(width, delay, 0.0)
        };
        Ok(fringe_scan(p, bath, &pair, &[delay])?.amplitudes[0])
    };
    let ratio = |d: f64| -> Result<f64> {
        Ok(amp(plus, d)? / (amp(PulseEncoding::zero(), d)? + amp(one, d)?))
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (ratio(x1)?, ratio(x2)?);
    while b - a > 1e-4 * width {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = ratio(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = ratio(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Fringe amplitudes measured by full dynamics: the stored pulse `input`
/// interferes at `delay` with each of the four probes (`input / sqrt 2`,
/// `|+>`, the etalon state, `|0>`).
pub fn simulated_amplitudes(
    p: &SystemParams,
    bath: &EmitterBath,
    input: PulseEncoding,
    circular_probe: PulseEncoding,
    width: f64,
    delay: f64,
) -> Result<FringeAmplitudeSet> {
    let probes = [
        input.scaled(FRAC_1_SQRT_2),
        PulseEncoding::plus(),
        circular_probe,
        PulseEncoding::zero(),
    ];
    let mut a = [0.0; 4];
    for (slot, probe) in a.iter_mut().zip(probes) {
        let pair = PulsePair {
            first: input.filter,
            first_amplitude: input.amplitude,
            second: probe.filter,
            second_amplitude: probe.amplitude,
            ..PulsePair::new(width, delay, 0.0)
        };
        *slot = fringe_scan(p, bath, &pair, &[delay])?.amplitudes[0];
    }
    Ok(FringeAmplitudeSet {
        a0: a[0],
        a1: a[1],
        a2: a[2],
        a3: a[3],
        c0: a[0] * 2f64.sqrt(),
    })
}
