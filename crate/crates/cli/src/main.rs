//! `dflow`: command-line driver for the derivative-flow library.
//!
//! Every command writes its outputs plus a `manifest.json` into `--out`, and
//! prints its summary JSON on stdout. Exit codes: 0 success, 1 usage error,
//! 2 numerical failure (with a JSON error report on stderr).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod failure;
mod output;
mod verify;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use log::{error, info};

use crate::args::Cli;
use crate::failure::Failure;
use crate::output::{write_manifest, OutputDir};

fn init_logging() {
    let env = env_logger::Env::new().filter_or("DFLOW_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    run(cli)
}

fn run(cli: Cli) -> ExitCode {
    let start = Instant::now();
    let outcome = execute(&cli);
    let elapsed = start.elapsed().as_secs_f64();
    let (files, failure) = match outcome {
        Ok(files) => (files, None),
        Err(f) => (Vec::new(), Some(f)),
    };
    if let Ok(dir) = OutputDir::create(&cli.global.out) {
        if let Err(e) = write_manifest(&dir, &cli, elapsed, &files, failure.as_ref()) {
            error!("could not write manifest: {}", e.message());
        }
    }
    match failure {
        None => {
            info!("{} finished in {elapsed:.3}s", cli.command.name());
            ExitCode::SUCCESS
        }
        Some(f) => {
            eprintln!("{}", f.report());
            ExitCode::from(f.exit_code())
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<String>, Failure> {
    cli.global.validate()?;
    if let Some(jobs) = cli.global.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::usage(format!("cannot start {jobs} worker threads: {e}")))?;
    }
    let dir = OutputDir::create(&cli.global.out)?;
    let report = commands::dispatch(&cli.command, &cli.global)?;
    let mut files = report.files(&dir)?;
    files.push(dir.write_json(&format!("{}.json", cli.command.name()), &report.summary)?);
    println!("{}", dflow_core::io::to_sorted_json(&report.summary)?);
    if let Some(problem) = report.failed_check {
        return Err(Failure::numerical(problem));
    }
    Ok(files)
}
