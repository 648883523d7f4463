use std::io::{self, Write as _};
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use grouptest_cli::args::{Cli, Command, OutputFormat};
use grouptest_cli::commands::{cmd_analyze, cmd_decode, cmd_design, cmd_simulate, json_to_csv_row};
use grouptest_cli::config::Config;
use grouptest_cli::experiment::cmd_experiment;
use grouptest_cli::verify;

fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    emit(&(serde_json::to_string_pretty(v)? + "\n"))
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<io::Error>()
        .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = Config::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Design(a) => print_json(&cmd_design(a, &cfg)?)?,
        Command::Decode(a) => print_json(&cmd_decode(a, &cfg)?)?,
        Command::Analyze(a) => match cmd_analyze(a, &cfg)? {
            (v, OutputFormat::Json) => print_json(&v)?,
            (v, OutputFormat::Csv) => emit(&json_to_csv_row(&v)?)?,
        },
        Command::Simulate(a) => print_json(&cmd_simulate(a, &cfg)?)?,
        Command::Experiment(a) => emit(&cmd_experiment(a, &cfg)?)?,
        Command::Verify(a) => {
            let ids: Vec<u32> = match &a.only {
                Some(ids) => ids.clone(),
                None => (1..=verify::CRITERIA).collect(),
            };
            let mut all = true;
            for id in ids {
                let o = verify::run(id);
                emit(&(o.line() + "\n"))?;
                all &= o.passed;
            }
            return Ok(all);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": format!("{e:#}") }));
            ExitCode::from(2)
        }
    }
}
