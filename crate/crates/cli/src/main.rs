mod args;
mod commands;
mod config;
mod fail;
mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use config::merge;
use fail::CliError;

const THREADS_VAR: &str = "URLLC_LAB_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize =
        raw.trim().parse().ok().filter(|&t| t >= 1).ok_or_else(|| {
            CliError::Config(format!("{THREADS_VAR} must be a positive integer, got '{raw}'"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))
}

fn dispatch(cli: &Cli) -> Result<String, CliError> {
    let cfg = cli.config.as_deref();
    let (table, footer) = match &cli.command {
        Command::Rcus(a) => commands::rcus(&merge(a, cfg)?),
        Command::VlsfBound(a) => commands::vlsf_bound(&merge(a, cfg)?),
        Command::DelayCcdf(a) => commands::delay_ccdf(&merge(a, cfg)?),
        Command::DelayViolation(a) => commands::delay_violation_cmd(&merge(a, cfg)?),
        Command::SncBound(a) => commands::snc_bound(&merge(a, cfg)?),
        Command::Throughput(a) => commands::throughput(&merge(a, cfg)?),
        Command::AgeCcdf(a) => commands::age_ccdf(&merge(a, cfg)?),
        Command::AgeViolation(a) => commands::age_violation_cmd(&merge(a, cfg)?),
        Command::HighRateLimit(a) => commands::high_rate(&merge(a, cfg)?),
        Command::Simulate(a) => commands::simulate(&merge(a, cfg)?),
    }?;
    Ok(table.render(&footer))
}

fn emit(csv: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, csv)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(csv.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn run<I: IntoIterator<Item = OsString>>(argv: I) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return 0;
        }
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            return fail(CliError::Config("a subcommand is required; see --help".into()));
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return fail(CliError::Config(first));
        }
    };
    let result =
        configure_threads().and_then(|_| dispatch(&cli)).and_then(|csv| emit(&csv, cli.out.as_deref()));
    match result {
        Ok(()) => 0,
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> i32 {
    eprintln!("{}", e.to_json());
    e.exit_code()
}

fn main() {
    std::process::exit(run(std::env::args_os()));
}
