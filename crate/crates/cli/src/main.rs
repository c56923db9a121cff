mod args;
mod commands;
mod error;
mod job;
mod settings;

use std::io::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command};
use error::{exit, CliError, CliResult};

pub const SCHEMA: &str = "bivarfun-report/1";

fn inputs<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn dispatch(command: &Command, cfg: &bivarfun::config::Config) -> CliResult<(Value, commands::Outcome)> {
    use commands::*;
    Ok(match command {
        Command::Numrange(a) => (inputs(a), numrange_cmd(a, cfg)?),
        Command::Eval(a) => (inputs(a), eval_cmd(a, cfg)?),
        Command::EvalMulti(a) => (inputs(a), eval_multi_cmd(a, cfg)?),
        Command::Frechet(a) => (inputs(a), frechet_cmd(a, cfg)?),
        Command::Krylov(a) => (inputs(a), krylov_cmd(a, cfg)?),
        Command::Certify(a) => (inputs(a), certify_cmd(a, cfg)?),
        Command::LemmaHarness(a) => (inputs(a), lemma_cmd(a, cfg)?),
        Command::Search(a) => (inputs(a), search_cmd(a, cfg)?),
        Command::Job(_) => unreachable!("jobs are expanded before dispatch"),
    })
}

fn emit(cli: &Cli, body: &str) -> CliResult<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    if let Command::Job(j) = &cli.command {
        let mut inner = job::JobSpec::read(&j.path)?.to_cli()?;
        if inner.output.is_none() {
            inner.output = cli.output.clone();
        }
        if inner.config.config.is_none() {
            inner.config.config = cli.config.config.clone();
        }
        return run(inner);
    }
    let cfg = cli.config.resolve()?;
    let start = Instant::now();
    let (inputs, outcome) = dispatch(&cli.command, &cfg)?;
    let body = match outcome.raw {
        Some(raw) => raw,
        None => {
            let report = json!({
                "schema": SCHEMA,
                "command": cli.command.name(),
                "inputs": inputs,
                "config": cfg,
                "result": outcome.result,
                "timing": { "elapsed_seconds": start.elapsed().as_secs_f64() },
            });
            serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
        }
    };
    emit(&cli, &body)?;
    if outcome.failed_cases > 0 {
        eprintln!("bivarfun: numeric error: {} case(s) could not be evaluated", outcome.failed_cases);
        return Ok(ExitCode::from(exit::NUMERIC));
    }
    if outcome.red_flag {
        eprintln!("bivarfun: certification red flag");
        return Ok(ExitCode::from(exit::RED_FLAG));
    }
    Ok(ExitCode::from(exit::OK))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::PARSE } else { exit::OK });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("bivarfun: {}: {e}", e.kind());
            e.exit_code()
        }
    }
}
