//! Command-line driver: `plaquette-sim <command> [--key value ...]`.
//!
//! Settings resolve as defaults, then `--config FILE` (`key = value` lines),
//! then flags. Every data file `<out>/<command>.csv` gets a JSON sidecar.
//! Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.

mod commands;
pub mod config;
pub mod output;
mod selftest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Arg, ArgAction, Command};

use crate::error::Error;
use config::{aliased, key, Key, Settings};

pub const WORKERS_ENV: &str = "PLAQUETTE_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

const COMMON: &[Key] = &[
    key("out", "results", "output directory"),
    key("tol", "1e-10", "eigensolver residual bound"),
];

const COUPLINGS: &[Key] = &[
    key("Cm", "", "matter capacitance (circuit mode)"),
    key("Cg", "", "gauge capacitance (circuit mode)"),
    key("CJ", "", "junction capacitance (circuit mode)"),
    key("Cs", "", "gate capacitance (circuit mode)"),
    key("Vs", "", "gate voltage (circuit mode)"),
    key("phi-ext", "", "external flux (circuit mode)"),
    key("EJ", "", "Josephson energy (circuit mode)"),
    key("charge-unit", "", "energy per inverse capacitance (circuit mode)"),
];

pub(crate) struct CommandDef {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
    pub circuit_mode: bool,
}

pub(crate) const COMMANDS: &[CommandDef] = &[
    CommandDef {
        name: "ground-scan",
        about: "ground-state observables over lambda/g and lambda/m",
        keys: &[
            key("basis", "mathieu", "mathieu | charge | full"),
            key("N", "13", "local Hilbert-space dimension per link"),
            key("lambda", "1", "Josephson coupling"),
            aliased("lg-grid", "lg", "0.1:100:40log", "lambda/g values"),
            aliased("lm-grid", "lm", "50", "lambda/m values (inf for m = 0)"),
            key("observables", "plaquette,n12_sq", "comma-separated observables"),
            key("aux-cutoff", "", "single-link charge cutoff of the Mathieu basis (auto if empty)"),
        ],
        circuit_mode: false,
    },
    CommandDef {
        name: "spectrum-compare",
        about: "full against effective low spectrum, zero-shifted",
        keys: &[
            aliased("m-grid", "m", "200", "matter charging energies"),
            key("g", "1", "gauge charging energy"),
            key("lambda", "1", "Josephson coupling"),
            key("levels", "9", "levels compared, ground state included"),
            key("N", "25", "local dimension of the charge basis"),
            key("basis", "charge", "charge | full"),
        ],
        circuit_mode: true,
    },
    CommandDef {
        name: "quench",
        about: "vortex kick of the ground state and its real-time evolution",
        keys: &[
            key("m", "0.02", "matter charging energy"),
            key("g", "0.02", "gauge charging energy"),
            key("lambda", "1", "Josephson coupling"),
            key("theta", "pi", "vortex angle"),
            key("N", "13", "local dimension of the charge basis"),
            key("basis", "charge", "charge | full"),
            key("t-max", "60", "end of the time window"),
            key("points", "241", "samples including t = 0"),
            key("propagator", "auto", "auto | krylov | spectral"),
            key("evolve-tol", "1e-12", "Krylov error per step"),
        ],
        circuit_mode: true,
    },
    CommandDef {
        name: "updown",
        about: "UP/DOWN plaquette exchange and its oscillation frequency",
        keys: &[
            key("m", "20", "matter charging energy"),
            key("g", "1", "gauge charging energy"),
            key("lambda", "1", "Josephson coupling"),
            key("N", "5", "local dimension of the charge basis"),
            key("periods", "8", "predicted periods covered"),
            key("points", "400", "samples, endpoint excluded"),
            key("propagator", "auto", "auto | krylov | spectral"),
            key("evolve-tol", "1e-12", "Krylov error per step"),
        ],
        circuit_mode: true,
    },
    CommandDef {
        name: "mathieu",
        about: "Mathieu characteristic values from both solvers",
        keys: &[
            aliased("q-grid", "q", "-8:0:9lin", "Mathieu parameters"),
            key("count", "9", "values per q"),
            key("cutoff", "60", "Fourier and charge cutoff"),
        ],
        circuit_mode: false,
    },
    CommandDef {
        name: "circuit",
        about: "couplings from circuit parameters, first order against exact",
        keys: &[
            key("Cm", "1", "matter capacitance"),
            key("Cg", "1", "gauge capacitance"),
            key("CJ", "0", "junction capacitance"),
            key("Cs", "0", "gate capacitance"),
            key("Vs", "0", "gate voltage"),
            key("phi-ext", "0", "external flux"),
            key("EJ", "1", "Josephson energy"),
            key("charge-unit", "1", "energy per inverse capacitance"),
            key("pair-charge", "1", "Cooper-pair charge in units of the gate charge"),
        ],
        circuit_mode: false,
    },
    CommandDef {
        name: "selftest",
        about: "run the built-in oracle checks",
        keys: &[],
        circuit_mode: false,
    },
];

impl CommandDef {
    pub fn all_keys(&self) -> Vec<Key> {
        let mut v: Vec<Key> = COMMON.to_vec();
        v.extend_from_slice(self.keys);
        if self.circuit_mode {
            v.extend_from_slice(COUPLINGS);
        }
        v
    }
}

fn cli() -> Command {
    let mut root = Command::new("plaquette-sim")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Superconducting-circuit U(1) plaquette simulator")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for def in COMMANDS {
        let mut sub = Command::new(def.name)
            .about(def.about)
            .arg(Arg::new("config").long("config").value_name("FILE").help("key = value settings file"))
            .arg(
                Arg::new("dump-config")
                    .long("dump-config")
                    .action(ArgAction::SetTrue)
                    .help("print resolved settings and exit"),
            );
        for k in def.all_keys() {
            let mut a = Arg::new(k.name)
                .long(k.name)
                .value_name("VALUE")
                .allow_hyphen_values(true)
                .help(k.help.to_string());
            if let Some(al) = k.alias {
                a = a.visible_alias(al);
            }
            sub = sub.arg(a);
        }
        root = root.subcommand(sub);
    }
    root
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConverged { .. } | Error::StepUnderflow { .. } | Error::NoPeak | Error::NonHermitian { .. } => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn configure_workers() -> Result<(), Error> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
        // a pool configured earlier in this process is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the command, returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let def = COMMANDS.iter().find(|s| s.name == name).expect("known command");
    let resolved = (|| -> Result<Settings, Error> {
        configure_workers()?;
        let mut s = Settings::from_defaults(&def.all_keys());
        if let Some(path) = sub.get_one::<String>("config") {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{path}: {e}")))?;
            s.apply_file(&text)?;
        }
        for k in def.all_keys() {
            if let Some(v) = sub.get_one::<String>(k.name) {
                s.set(k.name, v)?;
            }
        }
        Ok(s)
    })();
    let settings = match resolved {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if sub.get_flag("dump-config") {
        print!("{}", settings.dump());
        return EXIT_OK;
    }
    let start = Instant::now();
    let out = PathBuf::from(settings.raw("out"));
    let result = match name {
        "selftest" => selftest::run(),
        _ => commands::dispatch(name, &settings, &out, start),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        cli().debug_assert();
    }

    #[test]
    fn bad_input_exits_one() {
        assert_eq!(run(["p", "nope"]), EXIT_CONFIG);
        assert_eq!(run(["p", "mathieu", "--count", "x", "--out", "/nonexistent-dir/x"]), EXIT_CONFIG);
        assert_eq!(run(["p", "quench", "--m", "1", "--Cm", "1"]), EXIT_CONFIG);
        assert_eq!(run(["p", "mathieu", "--dump-config"]), EXIT_OK);
    }
}
