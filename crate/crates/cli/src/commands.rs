use std::f64::consts::PI;

use cavprot_core::bounds::{classical_strategy, ClassicalBoundQuery};
use cavprot_core::dynamics::{
    converged_fringe_scan, fringe_scan, sample_emitters, simulate, trace_grid, Convergence, FringeTrace,
    DEFAULT_N_SIM,
};
use cavprot_core::params::SystemParams;
use cavprot_core::pulse::{Pulse, PulsePair};
use cavprot_core::spectral::{
    default_window, linewidth_sweep, linspace, polariton_modes, transmission_spectrum, LinewidthMethod,
};
use cavprot_core::tomography::{
    density_matrix, fidelity, mle_project, rephasing_delay, simulated_amplitudes, tomography_amplitudes,
    FringeAmplitudeSet, PulseEncoding, QubitState,
};
use cavprot_core::units::{ghz_to_rad_per_ns as ghz, ns_to_ps, ps_to_ns, rad_per_ns_to_ghz as to_ghz};

use crate::config::{self, RawConfig};
use crate::error::CliError;
use crate::table::{Cell, Table};

pub const SPECTRUM_COLUMNS: &[&str] = &["f_GHz", "t_re", "t_im", "abs_t2"];
pub const SWEEP_COLUMNS: &[&str] = &[
    "delta_GHz",
    "gamma_plus_GHz",
    "gamma_minus_GHz",
    "f_plus_GHz",
    "f_minus_GHz",
    "middle_peak_GHz",
];
pub const DYNAMICS_COLUMNS: &[&str] = &[
    "t_ps",
    "input_re",
    "input_im",
    "cavity_re",
    "cavity_im",
    "transmitted_re",
    "transmitted_im",
    "transmitted_intensity_per_ns",
];
pub const FRINGE_COLUMNS: &[&str] = &["tau_ps", "amplitude", "counts_0", "counts_90", "counts_180", "counts_270"];
pub const TOMOGRAPHY_COLUMNS: &[&str] = &[
    "state", "delay_ps", "a0", "a1", "a2", "a3", "rho_00", "rho_01_re", "rho_01_im", "rho_11", "fidelity",
];
pub const BOUND_COLUMNS: &[&str] = &["mu", "eta", "n_min", "p", "fidelity"];

/// Inclusive grid `lo, lo + step, ...` up to `hi`.
pub fn stepped(lo: f64, hi: f64, step: f64, what: &str) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || hi < lo {
        return Err(CliError::Config(format!("{what}: need step > 0 and max >= min")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + step * i as f64).collect())
}

pub fn spectrum(c: &RawConfig) -> Result<Table, CliError> {
    let p = config::system(c)?;
    let (lo, hi) = default_window(&p);
    let f_min = c.f64("f_min_ghz")?.unwrap_or(to_ghz(lo));
    let f_max = c.f64("f_max_ghz")?.unwrap_or(to_ghz(hi));
    let n = c.usize("points", 2001)?;
    if n < 2 || f_max <= f_min {
        return Err(CliError::Config("spectrum: need points >= 2 and f_max_ghz > f_min_ghz".into()));
    }
    spectrum_table(&p, f_min, f_max, n)
}

pub fn spectrum_table(p: &SystemParams, f_min: f64, f_max: f64, n: usize) -> Result<Table, CliError> {
    let grid = linspace(ghz(f_min), ghz(f_max), n);
    let t = transmission_spectrum(p, &grid)?;
    let mut table = Table::new(SPECTRUM_COLUMNS);
    for (w, t) in grid.iter().zip(t) {
        table.push(vec![to_ghz(*w).into(), t.re.into(), t.im.into(), t.norm_sqr().into()]);
    }
    Ok(table)
}

pub fn sweep(c: &RawConfig) -> Result<Table, CliError> {
    let p = config::system(c)?;
    let lo = c.f64("delta_min_ghz")?.unwrap_or(-100.0);
    let hi = c.f64("delta_max_ghz")?.unwrap_or(100.0);
    let step = c.positive("delta_step_ghz", 2.5)?;
    let method = match c.choice("method", &["poles", "fwhm"], "poles")? {
        "fwhm" => LinewidthMethod::fwhm_default(),
        _ => LinewidthMethod::Poles,
    };
    let deltas = stepped(lo, hi, step, "sweep")?;
    sweep_table(&p, &deltas, method)
}

pub fn sweep_table(p: &SystemParams, deltas_ghz: &[f64], method: LinewidthMethod) -> Result<Table, CliError> {
    let deltas: Vec<f64> = deltas_ghz.iter().map(|d| ghz(*d)).collect();
    let rows = linewidth_sweep(p, &deltas, method)?;
    let mut table = Table::new(SWEEP_COLUMNS);
    let g = |v: Option<f64>| Cell::from(v.map(to_ghz));
    for r in rows {
        table.push(vec![
            to_ghz(r.detuning).into(),
            g(r.gamma_plus),
            g(r.gamma_minus),
            g(r.omega_plus),
            g(r.omega_minus),
            g(r.middle_peak),
        ]);
    }
    Ok(table)
}

fn pulse_width(c: &RawConfig) -> Result<f64, CliError> {
    let default = config::default_pulse_width(config::preset(c)?);
    Ok(ps_to_ns(c.positive("pulse_width_ps", default)?))
}

pub fn dynamics(c: &RawConfig) -> Result<Table, CliError> {
    let p = config::system(c)?;
    let width = pulse_width(c)?;
    let bath = sample_emitters(&p.density, c.usize("n_sim", DEFAULT_N_SIM)?, p.coupling, c.u64("seed", 1)?)?;
    let first = Pulse {
        filter: config::filter(c, "first_filter")?,
        ..Pulse::new(0.0, width)
    };
    let mut pulses = vec![first];
    if let Some(delay) = c.f64("delay_ps")? {
        pulses.push(Pulse {
            filter: config::filter(c, "second_filter")?,
            phase: c.f64("phase_rad")?.unwrap_or(0.0),
            ..Pulse::new(ps_to_ns(delay), width)
        });
    }
    let grid = trace_grid(&p, &pulses, ps_to_ns(c.positive("dt_ps", 0.1)?))?;
    let trace = simulate(&p, &bath, &pulses, &grid)?;
    let mut table = Table::new(DYNAMICS_COLUMNS);
    for i in 0..trace.times.len() {
        let (inp, a, t) = (trace.input[i], trace.cavity[i], trace.transmitted[i]);
        table.push(vec![
            ns_to_ps(trace.times[i]).into(),
            inp.re.into(),
            inp.im.into(),
            a.re.into(),
            a.im.into(),
            t.re.into(),
            t.im.into(),
            t.norm_sqr().into(),
        ]);
    }
    Ok(table)
}

/// Fringe scan at `n_sim`, or at the converged count when `converge` is set.
pub fn scan(
    p: &SystemParams,
    pp: &PulsePair,
    delays: &[f64],
    n_sim: usize,
    seed: u64,
    converge: bool,
) -> Result<FringeTrace, CliError> {
    if converge {
        let conv = Convergence {
            initial_n_sim: n_sim,
            ..Convergence::default()
        };
        let (trace, n) = converged_fringe_scan(p, pp, delays, seed, conv)?;
        eprintln!("converged at n_sim = {n}");
        return Ok(trace);
    }
    Ok(fringe_scan(p, &sample_emitters(&p.density, n_sim, p.coupling, seed)?, pp, delays)?)
}

pub fn fringe_rows(table: &mut Table, trace: &FringeTrace, prefix: &[Cell]) {
    for ((d, a), c) in trace.delays.iter().zip(&trace.amplitudes).zip(&trace.counts) {
        let mut row = prefix.to_vec();
        row.push(ns_to_ps(*d).into());
        row.push((*a).into());
        if prefix.is_empty() {
            row.extend(c.iter().map(|v| Cell::from(*v)));
        }
        table.push(row);
    }
}

pub fn fringes(c: &RawConfig) -> Result<Table, CliError> {
    let p = config::system(c)?;
    let pp = PulsePair::new(pulse_width(c)?, 0.0, 0.0)
        .with_filters(config::filter(c, "first_filter")?, config::filter(c, "second_filter")?);
    let lo = c.positive("tau_min_ps", 1.0)?;
    let hi = c.positive("tau_max_ps", 80.0)?;
    let step = c.positive("tau_step_ps", 0.5)?;
    let delays: Vec<f64> = stepped(lo, hi, step, "fringes")?.into_iter().map(ps_to_ns).collect();
    let trace = scan(
        &p,
        &pp,
        &delays,
        c.usize("n_sim", DEFAULT_N_SIM)?,
        c.u64("seed", 1)?,
        c.bool("converge")?,
    )?;
    let mut table = Table::new(FRINGE_COLUMNS);
    fringe_rows(&mut table, &trace, &[]);
    Ok(table)
}

fn reconstruct_row(table: &mut Table, name: &str, target: &QubitState, a: &FringeAmplitudeSet, delay: Option<f64>) -> Result<(), CliError> {
    let rho = mle_project(&density_matrix(a)?)?;
    let m = rho.0;
    table.push(vec![
        name.into(),
        delay.map(ns_to_ps).into(),
        a.a0.into(),
        a.a1.into(),
        a.a2.into(),
        a.a3.into(),
        m[(0, 0)].re.into(),
        m[(0, 1)].re.into(),
        m[(0, 1)].im.into(),
        m[(1, 1)].re.into(),
        fidelity(target, &rho).into(),
    ]);
    Ok(())
}

pub fn tomography(c: &RawConfig) -> Result<Table, CliError> {
    let gti = c.f64("gti_phase_rad")?.unwrap_or(0.52 * PI);
    let all = [
        ("zero", PulseEncoding::zero(), QubitState::zero()),
        ("plus", PulseEncoding::plus(), QubitState::plus()),
        ("circular", PulseEncoding::chirped(gti), QubitState::circular()),
    ];
    let which = c.choice("state", &["zero", "plus", "circular", "all"], "all")?;
    let chosen: Vec<_> = all.iter().filter(|s| which == "all" || s.0 == which).collect();
    let mut table = Table::new(TOMOGRAPHY_COLUMNS);
    if c.choice("source", &["simulated", "ideal"], "simulated")? == "ideal" {
        for (name, _, target) in chosen {
            reconstruct_row(&mut table, name, target, &tomography_amplitudes(target, 1.0), None)?;
        }
        return Ok(table);
    }
    let p = config::system(c)?;
    let width = pulse_width(c)?;
    let bath = sample_emitters(&p.density, c.usize("n_sim", DEFAULT_N_SIM)?, p.coupling, c.u64("seed", 1)?)?;
    let delay = match c.f64("delay_ps")? {
        Some(d) => ps_to_ns(d),
        None => {
            let tau_r = polariton_modes(&p, p.detuning())?.rabi_period();
            rephasing_delay(&p, &bath, width, 0.7 * tau_r, 1.3 * tau_r)?
        }
    };
    let probe = PulseEncoding::chirped(gti);
    for (name, enc, target) in chosen {
        let a = simulated_amplitudes(&p, &bath, *enc, probe, width, delay)?;
        reconstruct_row(&mut table, name, target, &a, Some(delay))?;
    }
    Ok(table)
}

pub fn classical_bound(c: &RawConfig) -> Result<Table, CliError> {
    let mu = c.f64("mu")?.unwrap_or(0.5);
    let eta = c
        .f64("eta")?
        .ok_or_else(|| CliError::Config("classical-bound needs `eta`".into()))?;
    let s = classical_strategy(ClassicalBoundQuery::new(mu, eta)?)?;
    let mut table = Table::new(BOUND_COLUMNS);
    table.push(vec![mu.into(), eta.into(), s.n_min.into(), s.p.into(), s.fidelity.into()]);
    Ok(table)
}
