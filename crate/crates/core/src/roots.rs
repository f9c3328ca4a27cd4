//! Damped Newton iteration for analytic functions of one complex variable.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Accept when `|f| <= residual_tol` and the last step is below `step_tol`.
    pub residual_tol: f64,
    pub step_tol: f64,
}

/// Finds a zero of `f` starting from `seed`. `f` returns `(value, derivative)`.
///
/// Steps that increase `|f|` are halved up to 40 times.
pub fn newton<F>(f: F, seed: Complex64, opts: NewtonOptions) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<(Complex64, Complex64)>,
{
    let mut z = seed;
    let (mut fz, mut dz) = f(z)?;
    for it in 0..opts.max_iterations {
        if dz.norm() == 0.0 || !dz.is_finite() {
            return Err(not_found(it, z, fz.norm()));
        }
        let step = fz / dz;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = z - step * scale;
            let (ft, dt) = f(trial)?;
            if ft.is_finite() && ft.norm() <= fz.norm() * (1.0 - 1e-4 * scale) + opts.residual_tol * 1e-3 {
                accepted = Some((trial, ft, dt));
                break;
            }
            scale *= 0.5;
        }
        let (next, fn_, dn) = match accepted {
            Some(v) => v,
            // no descent possible: we are at the floating-point floor of |f|
            None if fz.norm() <= opts.residual_tol => return Ok(z),
            None => return Err(not_found(it, z, fz.norm())),
        };
        let moved = (next - z).norm();
        z = next;
        fz = fn_;
        dz = dn;
        if fz.norm() <= opts.residual_tol && moved <= opts.step_tol {
            return Ok(z);
        }
    }
    Err(not_found(opts.max_iterations, z, fz.norm()))
}

fn not_found(iterations: usize, z: Complex64, residual: f64) -> Error {
    Error::RootNotFound {
        iterations,
        last_re: z.re,
        last_im: z.im,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> NewtonOptions {
        NewtonOptions {
            max_iterations: 100,
            residual_tol: 1e-12,
            step_tol: 1e-12,
        }
    }

    #[test]
    fn finds_complex_square_root() {
        let target = Complex64::new(-3.0, 4.0);
        let r = newton(|z| Ok((z * z - target, 2.0 * z)), Complex64::new(1.0, 1.0), opts()).unwrap();
        assert!((r - Complex64::new(1.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn reports_divergence_with_last_iterate() {
        // exp has no zeros
        let e = newton(|z| Ok((z.exp(), z.exp())), Complex64::new(0.0, 0.0), opts()).unwrap_err();
        assert!(matches!(e, Error::RootNotFound { .. }));
    }
}
