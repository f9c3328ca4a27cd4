//! Fixed-parameter runs behind the published figures.

use cavprot_core::density::SpectralDensity;
use cavprot_core::dynamics::DEFAULT_N_SIM;
use cavprot_core::params::{Preset, SystemParams};
use cavprot_core::pulse::{PulseFilter, PulsePair};
use cavprot_core::spectral::{default_window, LinewidthMethod};
use cavprot_core::units::{ps_to_ns, rad_per_ns_to_ghz as to_ghz};

use crate::commands::{fringe_rows, scan, spectrum_table, stepped, sweep_table};
use crate::config::{default_pulse_width, RawConfig, REPRODUCE_KEYS};
use crate::error::CliError;
use crate::table::{Cell, Table};

pub const TARGETS: &[&str] = &["fig2b", "fig2e", "fig2f-theory", "fig3", "figS1", "figS2-theory", "figS3"];

const SPECTRUM_POINTS: usize = 2001;
const GTI_PHASE: f64 = 0.52 * std::f64::consts::PI;

fn lorentzian(p: SystemParams) -> SystemParams {
    p.with_density(SpectralDensity::lorentzian(p.density.center, p.density.width).expect("preset width is valid"))
}

/// Prepends a label column to every row of `t`.
fn labelled(into: &mut Table, label: &[&str], t: Table) {
    for row in t.rows {
        let mut r: Vec<Cell> = label.iter().map(|s| Cell::from(*s)).collect();
        r.extend(row);
        into.push(r);
    }
}

fn spectrum(p: &SystemParams) -> Result<Table, CliError> {
    let (lo, hi) = default_window(p);
    spectrum_table(p, to_ghz(lo), to_ghz(hi), SPECTRUM_POINTS)
}

fn fringe_figure(c: &RawConfig, preset: Preset) -> Result<Table, CliError> {
    let p = preset.params();
    let n_sim = c.usize("n_sim", DEFAULT_N_SIM)?;
    let seed = c.u64("seed", 1)?;
    let converge = c.bool("converge")?;
    let width = ps_to_ns(default_pulse_width(preset));
    let delays: Vec<f64> = stepped(1.0, 80.0, 0.5, "delays")?.into_iter().map(ps_to_ns).collect();
    let base = PulsePair::new(width, 0.0, 0.0);
    let mut schemes = vec![
        ("bare-cavity", p.with_coupling(0.0), base),
        ("single-polariton", p, base.with_filters(PulseFilter::BandpassLower, PulseFilter::BandpassLower)),
        ("superposition", p, base),
    ];
    if preset != Preset::NdYvo1 {
        schemes.push((
            "chirped",
            p,
            base.with_filters(PulseFilter::GtiChirp { phase: GTI_PHASE }, PulseFilter::None),
        ));
    }
    let mut table = Table::new(&["scheme", "tau_ps", "amplitude"]);
    for (name, q, pp) in schemes {
        // an uncoupled cavity needs no emitters at all
        let (n, conv) = if q.coupling == 0.0 { (2, false) } else { (n_sim, converge) };
        let trace = scan(&q, &pp, &delays, n, seed, conv)?;
        fringe_rows(&mut table, &trace, &[Cell::from(name)]);
    }
    Ok(table)
}

pub fn run(target: &str, c: &RawConfig) -> Result<Table, CliError> {
    if let Some(k) = c.keys().find(|k| !REPRODUCE_KEYS.contains(k)) {
        return Err(CliError::Config(format!(
            "reproduce uses fixed parameters; `{k}` is not accepted (allowed: {})",
            REPRODUCE_KEYS.join(", ")
        )));
    }
    let sweep = |p: &SystemParams, lim: f64, step: f64| -> Result<Table, CliError> {
        sweep_table(p, &stepped(-lim, lim, step, "detuning")?, LinewidthMethod::Poles)
    };
    match target {
        "fig2b" => spectrum(&Preset::NdYvo1.params()),
        "fig2e" => spectrum(&Preset::NdYvo01DoubleGaussian.params()),
        "fig2f-theory" => {
            let p = Preset::NdYvo01Gaussian.params();
            let mut t = Table::new(&["model", "delta_GHz", "gamma_plus_GHz", "gamma_minus_GHz"]);
            for (name, q) in [("gaussian", p), ("lorentzian", lorentzian(p))] {
                let s = sweep(&q, 100.0, 2.5)?;
                let rows = s.rows.into_iter().map(|r| vec![r[0].clone(), r[1].clone(), r[2].clone()]).collect();
                labelled(&mut t, &[name], Table { columns: vec![], rows });
            }
            Ok(t)
        }
        "figS1" => {
            let mut t = Table::new(&["model", "f_GHz", "abs_t2"]);
            let double = Preset::NdYvo01DoubleGaussian.params();
            let (lo, hi) = default_window(&double);
            for (name, q) in [("double-gaussian", double), ("gaussian", Preset::NdYvo01Gaussian.params())] {
                let s = spectrum_table(&q, to_ghz(lo), to_ghz(hi), SPECTRUM_POINTS)?;
                let rows = s.rows.into_iter().map(|r| vec![r[0].clone(), r[3].clone()]).collect();
                labelled(&mut t, &[name], Table { columns: vec![], rows });
            }
            Ok(t)
        }
        "figS2-theory" => {
            let mut t = Table::new(&["device", "model", "delta_GHz", "gamma_plus_GHz", "gamma_minus_GHz"]);
            let devices = [("1pct", Preset::NdYvo1.params(), 200.0), ("0.1pct", Preset::NdYvo01Gaussian.params(), 100.0)];
            for (dev, p, lim) in devices {
                for (name, q) in [("gaussian", p), ("lorentzian", lorentzian(p))] {
                    let s = sweep(&q, lim, 5.0)?;
                    let rows = s.rows.into_iter().map(|r| vec![r[0].clone(), r[1].clone(), r[2].clone()]).collect();
                    labelled(&mut t, &[dev, name], Table { columns: vec![], rows });
                }
            }
            Ok(t)
        }
        "fig3" => fringe_figure(c, Preset::NdYvo01Gaussian),
        "figS3" => fringe_figure(c, Preset::NdYvo1),
        other => Err(CliError::Config(format!(
            "unknown reproduce target `{other}` (expected one of {})",
            TARGETS.join(", ")
        ))),
    }
}
