//! Best intercept-resend fidelity for a weak coherent qubit stored in a
//! memory of efficiency `eta`.
//!
//! A classical memory that measures `N` photons can re-emit a qubit with
//! fidelity `(N+1)/(N+2)`. To fake an efficiency `eta` it keeps only the
//! highest photon numbers: every event above a threshold `N_min`, plus a
//! fraction of the events at `N_min` carrying absolute probability `p`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};

/// Relative size below which Poisson terms are dropped.
const TRUNCATION: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalBoundQuery {
    /// Mean photon number.
    pub mu: f64,
    /// Storage and retrieval efficiency.
    pub eta: f64,
}

impl ClassicalBoundQuery {
    pub fn new(mu: f64, eta: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(invalid("mu", format!("must be positive, got {mu}")));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(invalid("eta", format!("must lie in (0, 1], got {eta}")));
        }
        Ok(Self { mu, eta })
    }
}

/// Fidelity of the optimal measure-and-prepare strategy on `n` photons.
pub fn fock_fidelity(n: u64) -> f64 {
    (n as f64 + 1.0) / (n as f64 + 2.0)
}

/// Poisson weights `P(0..=M)`, cut once terms fall below the truncation
/// threshold past the mode.
fn poisson(mu: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut peak: f64 = 0.0;
    for n in 0.. {
        let nf = n as f64;
        let w = (nf * mu.ln() - mu - ln_gamma(nf + 1.0)).exp();
        out.push(w);
        peak = peak.max(w);
        if nf > mu && w < TRUNCATION * peak {
            break;
        }
    }
    out
}

/// `tails[i] = sum_{N >= i} P(N)`, summed from the small end.
fn tails(weights: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; weights.len() + 1];
    for i in (0..weights.len()).rev() {
        t[i] = t[i + 1] + weights[i];
    }
    t
}

/// Decomposition of the classical strategy for one query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalStrategy {
    pub n_min: u64,
    /// Absolute probability of acting on exactly `n_min` photons.
    pub p: f64,
    pub fidelity: f64,
}

impl ClassicalStrategy {
    /// Efficiency implied by `n_min` and `p`.
    pub fn efficiency(&self, mu: f64) -> f64 {
        let w = poisson(mu);
        let t = tails(&w);
        let above = t.get(self.n_min as usize + 1).copied().unwrap_or(0.0);
        (self.p + above) / -(-mu).exp_m1()
    }
}

pub fn classical_strategy(q: ClassicalBoundQuery) -> Result<ClassicalStrategy> {
    let q = ClassicalBoundQuery::new(q.mu, q.eta)?;
    let w = poisson(q.mu);
    let t = tails(&w);
    let nonvacuum = -(-q.mu).exp_m1();
    let budget = nonvacuum * q.eta;
    // tolerate rounding in the tail sums so that eta = 1 gives N_min = 0
    let slack = 1e-13 * nonvacuum;
    let n_min = (0..w.len())
        .find(|&i| t[i + 1] <= budget + slack)
        .expect("the tail past the truncation point is zero");
    let above = t[n_min + 1];
    let p = if budget - above <= slack { 0.0 } else { budget - above };
    let kept: f64 = w
        .iter()
        .enumerate()
        .skip(n_min + 1)
        .map(|(n, pn)| fock_fidelity(n as u64) * pn)
        .sum();
    let fidelity = (fock_fidelity(n_min as u64) * p + kept) / budget;
    Ok(ClassicalStrategy {
        n_min: n_min as u64,
        p,
        fidelity,
    })
}

/// Smallest photon-number threshold compatible with efficiency `eta`.
pub fn n_min(q: ClassicalBoundQuery) -> Result<u64> {
    classical_strategy(q).map(|s| s.n_min)
}

/// Classical fidelity bound for storing a coherent qubit.
pub fn classical_fidelity(q: ClassicalBoundQuery) -> Result<f64> {
    classical_strategy(q).map(|s| s.fidelity)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(mu: f64, eta: f64) -> ClassicalBoundQuery {
        ClassicalBoundQuery::new(mu, eta).unwrap()
    }

    #[test]
    fn thresholds() {
        assert_eq!(n_min(q(0.5, 0.256)).unwrap(), 1);
        assert_eq!(n_min(q(0.5, 1.0)).unwrap(), 0);
        assert_eq!(n_min(q(0.5, 0.051)).unwrap(), 2);
    }

    #[test]
    fn unit_efficiency_averages_over_photon_number() {
        // eta = 1 keeps every non-vacuum event: sum (N+1)/(N+2) P(N) / (1 - P(0))
        let mu: f64 = 0.5;
        let mut direct = 0.0;
        let mut pn = (-mu).exp();
        for n in 1..60 {
            pn *= mu / n as f64;
            direct += fock_fidelity(n) * pn;
        }
        direct /= 1.0 - (-mu).exp();
        let s = classical_strategy(q(mu, 1.0)).unwrap();
        assert_eq!(s.p, 0.0);
        assert!((s.fidelity - direct).abs() < 1e-13);
    }

    #[test]
    fn fock_helper() {
        assert!((fock_fidelity(1) - 2.0 / 3.0).abs() < 1e-16);
        assert_eq!(fock_fidelity(0), 0.5);
    }

    #[test]
    fn invalid_queries_rejected() {
        assert!(ClassicalBoundQuery::new(0.0, 0.5).is_err());
        assert!(ClassicalBoundQuery::new(0.5, 0.0).is_err());
        assert!(ClassicalBoundQuery::new(0.5, 1.01).is_err());
        assert!(ClassicalBoundQuery::new(f64::NAN, 0.5).is_err());
    }
}
