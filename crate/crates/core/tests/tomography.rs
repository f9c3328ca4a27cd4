use std::f64::consts::{FRAC_1_SQRT_2, PI};

use cavprot_core::tomography::*;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Near-uniform points on the Bloch sphere (Fibonacci lattice).
fn bloch_grid(n: usize) -> Vec<QubitState> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            QubitState::from_bloch(z.acos(), golden * k as f64)
        })
        .collect()
}

fn reconstruct(a: &FringeAmplitudeSet) -> DensityMatrix2 {
    mle_project(&density_matrix(a).unwrap()).unwrap()
}

/// Peak-to-peak fringe of [`count_rate`] over a dense phase scan.
fn fringe_contrast(psi: &QubitState, probe: &QubitState) -> f64 {
    let rates: Vec<f64> = (0..3600).map(|k| count_rate(psi, probe, 2.0 * PI * k as f64 / 3600.0)).collect();
    let max = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

#[test]
fn amplitudes_agree_with_scanned_count_rates() {
    // with C0 = 4 each amplitude is the peak-to-peak fringe of its probe
    let probes = [QubitState::plus(), QubitState::circular(), QubitState::zero()];
    for psi in bloch_grid(30).into_iter().chain([QubitState::zero(), QubitState::plus(), QubitState::circular()]) {
        let a = tomography_amplitudes(&psi, 4.0);
        // the reference probe carries half the energy of the stored pulse
        assert!((a.a0 - FRAC_1_SQRT_2 * fringe_contrast(&psi, &psi)).abs() < 1e-9);
        for (got, probe) in [a.a1, a.a2, a.a3].into_iter().zip(&probes) {
            assert!((got - fringe_contrast(&psi, probe)).abs() < 1e-5, "{psi:?}");
        }
    }
}

#[test]
fn named_states_give_the_expected_amplitude_patterns() {
    let s = FRAC_1_SQRT_2;
    let cases = [
        (QubitState::zero(), [s, s, s, 1.0]),
        (QubitState::plus(), [s, 1.0, s, s]),
        (QubitState::circular(), [s, s, 1.0, s]),
    ];
    for (psi, want) in cases {
        let got = tomography_amplitudes(&psi, 1.0).as_array();
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{psi:?}: {got:?}");
        }
    }
}

#[test]
fn noiseless_round_trip_over_the_bloch_sphere() {
    for psi in bloch_grid(100) {
        let rho = reconstruct(&tomography_amplitudes(&psi, 1.0));
        let f = fidelity(&psi, &rho);
        assert!(f > 0.999, "{psi:?}: {f}");
    }
}

#[test]
fn one_percent_noise_costs_less_than_two_percent_fidelity() {
    let grid = bloch_grid(100);
    let noise = Normal::new(1.0, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut clean, mut noisy) = (0.0, 0.0);
    let mut trials = 0;
    for psi in &grid {
        let ideal = tomography_amplitudes(psi, 1.0);
        let f0 = fidelity(psi, &reconstruct(&ideal));
        for _ in 0..10 {
            let a = FringeAmplitudeSet {
                a0: ideal.a0 * noise.sample(&mut rng),
                a1: ideal.a1 * noise.sample(&mut rng),
                a2: ideal.a2 * noise.sample(&mut rng),
                a3: ideal.a3 * noise.sample(&mut rng),
                c0: ideal.c0,
            };
            clean += f0;
            noisy += fidelity(psi, &reconstruct(&a));
            trials += 1;
        }
    }
    assert_eq!(trials, 1000);
    let degradation = 1.0 - noisy / clean;
    assert!(degradation < 0.02, "{degradation}");
}

#[test]
fn projection_matches_a_grid_search() {
    let raw = DensityMatrix2(nalgebra::Matrix2::new(C::new(1.1, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(-0.1, 0.0)));
    // coarse-to-fine search over the Bloch ball
    let mut best = ([0.0; 3], f64::INFINITY);
    let mut centre = [0.0; 3];
    let mut step = 0.1;
    for _ in 0..6 {
        for i in -10..=10 {
            for j in -10..=10 {
                for k in -10..=10 {
                    let r = [centre[0] + step * i as f64, centre[1] + step * j as f64, centre[2] + step * k as f64];
                    if r.iter().map(|x| x * x).sum::<f64>() > 1.0 {
                        continue;
                    }
                    let cost = mle_cost(&DensityMatrix2::from_bloch(r), &raw);
                    if cost < best.1 {
                        best = (r, cost);
                    }
                }
            }
        }
        centre = best.0;
        step /= 5.0;
    }
    let oracle = DensityMatrix2::from_bloch(best.0);
    let rho = mle_project(&raw).unwrap();
    assert!(rho.is_physical(1e-12));
    assert!(rho.trace_distance(&oracle) < 1e-3, "{:?} vs {:?}", rho.bloch_vector(), best.0);
}

#[test]
fn physical_inputs_are_left_alone() {
    let zero = QubitState::zero().projector();
    assert!(mle_project(&zero).unwrap().trace_distance(&zero) < 1e-8);
    let mixed = DensityMatrix2::from_bloch([0.0; 3]);
    assert!(mle_project(&mixed).unwrap().trace_distance(&mixed) < 1e-8);
}

#[test]
fn fidelity_reference_values() {
    let psi = QubitState::from_bloch(1.1, -0.4);
    assert!((fidelity(&psi, &psi.projector()) - 1.0).abs() < 1e-12);
    assert!((fidelity(&QubitState::zero(), &DensityMatrix2::from_bloch([0.0; 3])) - 0.5).abs() < 1e-12);
    assert!((fidelity(&QubitState::plus(), &QubitState::zero().projector()) - 0.5).abs() < 1e-12);
}

proptest! {
    #[test]
    fn reconstruction_ignores_overall_scale(theta in 0.0f64..PI, phi in 0.0f64..(2.0 * PI), c in 1e-3f64..1e3) {
        let a = tomography_amplitudes(&QubitState::from_bloch(theta, phi), 1.0);
        let r1 = density_matrix(&a).unwrap();
        let r2 = density_matrix(&a.scaled(c)).unwrap();
        prop_assert!((r1.0 - r2.0).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn projection_is_positive(a0 in 0.1f64..2.0, a1 in 0.0f64..3.0, a2 in 0.0f64..3.0, a3 in 0.0f64..3.0) {
        let raw = density_matrix(&FringeAmplitudeSet { a0, a1, a2, a3, c0: a0 * 2f64.sqrt() }).unwrap();
        let rho = mle_project(&raw).unwrap();
        let ev = rho.eigenvalues();
        prop_assert!(ev[0] >= -1e-12 && ev[1] >= -1e-12, "{ev:?}");
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.is_hermitian(1e-12));
    }
}
