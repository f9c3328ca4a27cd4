#![allow(dead_code)]

use num_complex::Complex64;

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, n: usize) -> Complex64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * (h / 3.0)
}

/// Simpson on `[a, b]` split into geometrically growing segments, for
/// integrands that vary on the scale of their distance from `a`.
fn graded<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, first: f64) -> f64 {
    let mut total = 0.0;
    let (mut lo, mut hi) = (a, a + first);
    while lo < b {
        hi = hi.min(b);
        total += simpson(|x| Complex64::new(f(x), 0.0), lo, hi, 2000).re;
        let len = hi - lo;
        lo = hi;
        hi = lo + 2.0 * len;
    }
    total
}

/// `int_0^reach g(s) eps / (s^2 + eps^2) ds`: the peak is mapped onto
/// `theta = atan(s / eps)` and the long tail is integrated in `s`.
fn lorentz_weighted(g: impl Fn(f64) -> f64, eps: f64, reach: f64) -> f64 {
    let knee = (50.0 * eps).min(reach);
    let near = simpson(|t| Complex64::new(g(eps * t.tan()), 0.0), 0.0, (knee / eps).atan(), 20_000).re;
    let far = graded(|s| g(s) * eps / (s * s + eps * eps), knee, reach, knee);
    near + far
}

/// `int rho(x) / (omega - x + i eps) dx`, folding the integrand about
/// `x = omega` so that only smooth pieces and Lorentzian-weighted pieces
/// remain.
pub fn cauchy_oracle(rho: impl Fn(f64) -> f64, omega: f64, eps: f64, reach: f64) -> Complex64 {
    let even = |s: f64| rho(omega + s) + rho(omega - s);
    // (rho(omega+s) - rho(omega-s)) / s, with its limit at s = 0
    let slope = |s: f64| {
        let s = s.max(1e-7 * reach);
        (rho(omega + s) - rho(omega - s)) / s
    };
    let absorptive = lorentz_weighted(even, eps, reach) / eps;
    // s^2 / (s^2 + eps^2) = 1 - eps^2 / (s^2 + eps^2)
    let plain = simpson(|s| Complex64::new(slope(s), 0.0), 0.0, reach, 200_000).re;
    let dispersive = plain - eps * lorentz_weighted(slope, eps, reach);
    // f(s)/(i eps - s) + f(-s)/(i eps + s) = -[i eps (f(s)+f(-s)) + s (f(s)-f(-s))] / (s^2 + eps^2)
    -Complex64::new(dispersive, eps * absorptive)
}

