//! Command-line front end of `bzl`: flag and config-file parsing, command
//! dispatch on a sized thread pool, and deterministic CSV/JSON output.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod expr;
pub mod output;

use std::path::PathBuf;

use serde_json::{json, Value};

use crate::args::{Cli, Command};
use crate::config::{FileConfig, Merge};
use crate::error::{config_err, CliResult};
use crate::output::{write_outcome, Outcome};

pub const DEFAULT_OUT_DIR: &str = "bzl-out";

/// What a finished run printed and where it wrote.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub command: &'static str,
    pub out_dir: PathBuf,
    pub manifest: PathBuf,
    pub summary: Value,
}

/// Parses nothing itself: merges the optional config file under the flags,
/// runs the command on a pool of the requested size and writes the outputs.
pub fn run(mut cli: Cli) -> CliResult<RunReport> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let name = cli.command.name();
    if let Some(c) = &file.command {
        if c != name {
            return Err(config_err(format!(
                "config file is for `{c}`, but `{name}` was requested"
            )));
        }
    }
    merge_file(&mut cli.command, &file);
    let threads = cli.threads.or(file.threads).unwrap_or(0);
    let out_dir = cli
        .out
        .clone()
        .or(file.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| config_err(format!("cannot start thread pool: {e}")))?;
    log::info!("running `{name}` on {} threads", pool.current_num_threads());
    let outcome = pool.install(|| dispatch(&cli.command))?;

    let manifest = write_outcome(&out_dir, name, &outcome)?;
    Ok(RunReport {
        command: name,
        out_dir,
        manifest,
        summary: json!({ "command": name, "summary": outcome.summary }),
    })
}

fn merge_file(command: &mut Command, file: &FileConfig) {
    match command {
        Command::Spectrum(c)
        | Command::Wkb(c)
        | Command::WsDiag(c)
        | Command::Sweep(c)
        | Command::ContinuumCheck(c) => {
            c.model.merge(&file.model);
            c.numerics.merge(&file.numerics);
        }
        Command::Evolve(c) => {
            c.model.merge(&file.model);
            c.numerics.merge(&file.numerics);
            c.evolution.merge(&file.evolution);
        }
        Command::QwSpectrum(c) | Command::QwSweep(c) | Command::QwFlatness(c) => {
            c.walk.merge(&file.walk);
            c.numerics.merge(&file.numerics);
        }
        Command::QwEvolve(c) => {
            c.walk.merge(&file.walk);
            c.evolution.merge(&file.evolution);
        }
        Command::Classify(_) | Command::Repro(_) => {}
    }
}

fn dispatch(command: &Command) -> CliResult<Outcome> {
    match command {
        Command::Spectrum(c) => commands::spectrum(&c.model, &c.numerics),
        Command::Wkb(c) => commands::wkb(&c.model, &c.numerics),
        Command::WsDiag(c) => commands::ws_diag(&c.model, &c.numerics),
        Command::Sweep(c) => commands::sweep(&c.model, &c.numerics),
        Command::Evolve(c) => commands::evolve(&c.model, &c.numerics, &c.evolution),
        Command::Classify(c) => commands::classify(c),
        Command::QwSpectrum(c) => commands::qw_spectrum(&c.walk, &c.numerics),
        Command::QwSweep(c) => commands::qw_sweep(&c.walk, &c.numerics),
        Command::QwEvolve(c) => commands::qw_evolve_cmd(&c.walk, &c.evolution),
        Command::QwFlatness(c) => commands::qw_flatness(&c.walk, &c.numerics),
        Command::ContinuumCheck(c) => commands::continuum_check(&c.model, &c.numerics),
        Command::Repro(r) => commands::repro(r.figure),
    }
}
