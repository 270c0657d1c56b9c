//! Command-line front end: configuration, curve emission and the verification
//! suite.

pub mod config;
pub mod fuzz;
pub mod output;
pub mod presets;
pub mod runner;
pub mod verify;

use std::ffi::OsString;
use std::fs;

use clap::Parser;
use thiserror::Error;

use config::{resolve, Cli, ScenarioKind};
use verify::{run_verify, VerifyOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Failure(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Failure(_) => 2,
        }
    }
}

fn core_error(e: qslbound_core::Error) -> CliError {
    match e {
        qslbound_core::Error::InvalidParameter(msg) => CliError::Usage(msg),
        other => CliError::Failure(other.into()),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let inv = resolve(cli.command)?;
    if inv.kind == ScenarioKind::Verify {
        let report = run_verify(&VerifyOptions::default());
        print!("{}", report.render_text());
        if let Some(path) = &inv.out {
            let json = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?;
            fs::write(path, json + "\n")
                .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
        }
        if !report.passed {
            let n = report.failures().count();
            return Err(anyhow::anyhow!("{n} verification checks failed").into());
        }
        return Ok(());
    }
    for job in &inv.jobs {
        let curve = runner::run_job(job).map_err(core_error)?;
        let paths = output::emit_curves(job, &curve)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", job.out.display()))?;
        for p in paths {
            log::info!("wrote {}", p.display());
            println!("{}", p.display());
        }
        if !curve.warnings.is_empty() {
            log::info!(
                "{}: {} singular samples were filled",
                job.out.display(),
                curve.warnings.len()
            );
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            e.exit_code()
        }
    }
}
