mod args;
mod config;
mod error;
mod format;
mod jobs;
mod manifest;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command};
use config::ConfigFile;
use error::CliError;
use jobs::{Job, Outcome};
use manifest::RunManifest;

const THREADS_VAR: &str = "HEATCTL_THREADS";

fn threads() -> usize {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
}

fn emit(outcome: &Outcome) -> Result<(), CliError> {
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for a in &outcome.artifacts {
        match &a.path {
            Some(path) => std::fs::write(path, &a.text).map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(a.text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|source| CliError::Write { path: "<stdout>".into(), source })?;
            }
        }
    }
    Ok(())
}

fn verify(outcome: &Outcome) -> Result<(), CliError> {
    for a in &outcome.artifacts {
        let Some(path) = &a.path else {
            continue;
        };
        let recorded = std::fs::read(path).map_err(|source| CliError::Read {
            path: path.clone(),
            source,
        })?;
        if recorded != a.text.as_bytes() {
            return Err(CliError::Mismatch(format!("{} differs", path.display())));
        }
        eprintln!("identical: {}", path.display());
    }
    Ok(())
}

fn replay(path: &Path, check: bool) -> Result<(), CliError> {
    let manifest = RunManifest::read(path)?;
    let outcome = manifest.job.execute(threads())?;
    if check {
        verify(&outcome)
    } else {
        emit(&outcome)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Replay { path, verify } = &cli.command {
        return replay(path, *verify);
    }
    let file = ConfigFile::load(cli.config.as_deref())?;
    let job = Job::resolve(cli.command, &file)?;
    let start = Instant::now();
    let outcome = job.execute(threads())?;
    emit(&outcome)?;
    if let Some(path) = &cli.manifest {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").into(),
            outputs: outcome.artifacts.iter().filter_map(|a| a.path.clone()).collect(),
            duration_s: start.elapsed().as_secs_f64(),
            job,
        }
        .write(path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("heatctl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
