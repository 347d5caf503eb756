use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use ptg_cli::config::Cli;
use ptg_cli::{commands, CliError, ExitStatus};

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PTG_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "PTG_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the worker pool: {e}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    init_threads()?;
    let cfg = cli.resolve()?;
    log::info!("running {:?}", cli.kind());
    commands::run(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(ExitStatus::BadConfig as u8),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ptg: {e}");
            ExitCode::from(e.exit_status() as u8)
        }
    }
}
