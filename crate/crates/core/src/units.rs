//! Unit conversions at the I/O boundary.
//!
//! Internally every frequency is an angular frequency in rad/ns and every
//! time is in ns. User-facing values are ordinary frequencies in GHz and
//! times in ps.

use std::f64::consts::PI;

/// GHz (ordinary frequency) to rad/ns.
pub fn ghz_to_rad_per_ns(f_ghz: f64) -> f64 {
    2.0 * PI * f_ghz
}

/// rad/ns to GHz (ordinary frequency).
pub fn rad_per_ns_to_ghz(w: f64) -> f64 {
    w / (2.0 * PI)
}

pub fn ps_to_ns(t_ps: f64) -> f64 {
    t_ps * 1e-3
}

pub fn ns_to_ps(t_ns: f64) -> f64 {
    t_ns * 1e3
}
