mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;
use std::time::{Instant, SystemTime};

use clap::Parser;

use crate::args::Cli;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String, std::io::Error),
    Core(orthospec_core::Error),
}

impl From<orthospec_core::Error> for CliError {
    fn from(e: orthospec_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Io(path, e) => write!(f, "{path}: {e}"),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(orthospec_core::Error::NotConverged { .. }) => 3,
            CliError::Io(..) => 1,
            _ => 2,
        }
    }
}

fn parse(argv: &[String]) -> Result<Cli, clap::Error> {
    Cli::try_parse_from(argv)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match parse(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli, argv) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli, argv: Vec<String>) -> Result<bool, CliError> {
    let name = commands::name(&cli.command);
    let cli = match &cli.global.config {
        Some(path) => {
            let expanded = config::expand_argv(argv.clone(), name, Some(path))?;
            parse(&expanded).map_err(|e| CliError::Usage(e.render().to_string()))?
        }
        None => cli,
    };
    let g = &cli.global;
    if let Some(w) = g.workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let started = SystemTime::now();
    let clock = Instant::now();
    let outcome = if g.self_test {
        commands::self_test(&cli.command, g.output)?
    } else {
        commands::run(&cli.command, g.output, g.seed)?
    };
    let meta = output::Meta {
        schema: orthospec_core::SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        command: name,
        argv: &argv,
        seed: g.seed,
        workers: rayon::current_num_threads(),
        started_unix: output::unix_seconds(started),
        finished_unix: output::unix_seconds(SystemTime::now()),
        elapsed_seconds: clock.elapsed().as_secs_f64(),
    };
    output::emit(&outcome.body, g.out.as_deref(), &meta)?;
    Ok(outcome.passed)
}
