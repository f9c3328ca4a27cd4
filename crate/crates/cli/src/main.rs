//! `cavprot`: spectra, linewidth sweeps, time-domain interferometry,
//! tomography and classical bounds for cavity-protected ensembles.

mod commands;
mod config;
mod error;
mod reproduce;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};

use config::{RawConfig, KEYS};
use error::CliError;

/// Default output directory when `out` is not given.
const OUT_DIR_ENV: &str = "CAVPROT_OUT_DIR";

const SUBCOMMANDS: &[(&str, &str)] = &[
    ("spectrum", "transmission |t(f)|^2 of the cavity"),
    ("sweep", "polariton linewidths versus cavity detuning"),
    ("dynamics", "time-domain fields for one or two input pulses"),
    ("fringes", "two-pulse fringe amplitude versus delay"),
    ("tomography", "reconstruct stored qubits from fringe amplitudes"),
    ("classical-bound", "best classical storage fidelity for a coherent qubit"),
    ("reproduce", "fixed runs behind the published figures"),
];

fn flag(key: &str) -> String {
    key.replace('_', "-")
}

fn with_keys(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("key = value file; flags override its entries"),
    );
    KEYS.iter().fold(cmd, |cmd, (key, help)| {
        cmd.arg(
            Arg::new(*key)
                .long(flag(key))
                .value_name("VALUE")
                .allow_negative_numbers(true)
                .help(*help),
        )
    })
}

fn cli() -> Command {
    let mut root = Command::new("cavprot")
        .about("Cavity-protected emitter ensembles: spectra, dynamics, tomography and bounds")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .after_help(format!("Output goes to `--out`, else to ${OUT_DIR_ENV}/<command>.<ext>, else to stdout."));
    for (name, about) in SUBCOMMANDS {
        let mut sub = with_keys(Command::new(*name).about(*about));
        if *name == "reproduce" {
            sub = sub.arg(
                Arg::new("target")
                    .required(true)
                    .value_parser(reproduce::TARGETS.to_vec())
                    .help("figure to reproduce"),
            );
        }
        root = root.subcommand(sub);
    }
    root
}

fn gather(m: &ArgMatches) -> Result<RawConfig, CliError> {
    let mut c = match m.get_one::<String>("config") {
        Some(path) => RawConfig::from_file(&PathBuf::from(path))?,
        None => RawConfig::default(),
    };
    for (key, _) in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            c.set(key, v.clone());
        }
    }
    Ok(c)
}

fn destination(c: &RawConfig, stem: &str, ext: &str) -> Option<PathBuf> {
    match c.get("out") {
        Some("-") => None,
        Some(path) => Some(PathBuf::from(path)),
        None => std::env::var_os(OUT_DIR_ENV).map(|dir| PathBuf::from(dir).join(format!("{stem}.{ext}"))),
    }
}

fn run(m: &ArgMatches) -> Result<(), CliError> {
    let (name, sub) = m.subcommand().expect("a subcommand is required");
    let c = gather(sub)?;
    let format = config::format(&c)?;
    let (stem, table) = match name {
        "spectrum" => (name.to_string(), commands::spectrum(&c)?),
        "sweep" => (name.to_string(), commands::sweep(&c)?),
        "dynamics" => (name.to_string(), commands::dynamics(&c)?),
        "fringes" => (name.to_string(), commands::fringes(&c)?),
        "tomography" => (name.to_string(), commands::tomography(&c)?),
        "classical-bound" => (name.to_string(), commands::classical_bound(&c)?),
        "reproduce" => {
            let target = sub.get_one::<String>("target").expect("required");
            (target.clone(), reproduce::run(target, &c)?)
        }
        other => unreachable!("unregistered subcommand {other}"),
    };
    let fail = |e: io::Error| CliError::Output(e.to_string());
    match destination(&c, &stem, format.extension()) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(fail)?;
            }
            let file = File::create(&path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            table.write(format, &mut w)?;
            w.flush().map_err(fail)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            table.write(format, &mut w)?;
            w.flush().map_err(fail)
        }
    }
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cavprot: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_tree_is_consistent() {
        cli().debug_assert();
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "mu = 0.3\neta = 0.5\n").unwrap();
        let m = cli()
            .try_get_matches_from(["cavprot", "classical-bound", "--config", path.to_str().unwrap(), "--mu", "0.5"])
            .unwrap();
        let c = gather(m.subcommand().unwrap().1).unwrap();
        assert_eq!(c.get("mu"), Some("0.5"));
        assert_eq!(c.get("eta"), Some("0.5"));
    }
}
