//! Job files: one command with its function, matrices and parameters.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Deserialize;
use serde_json::Value;

use crate::args::Cli;
use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: String,
    #[serde(default, alias = "function_text")]
    pub function: Option<String>,
    #[serde(default, alias = "matrix_paths")]
    pub matrices: Vec<PathBuf>,
    /// Flag name (without dashes) to value; `true` sets a switch.
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default, alias = "output_path")]
    pub output: Option<PathBuf>,
}

fn matrix_flags(command: &str, count: usize) -> CliResult<Vec<&'static str>> {
    let named: &[&str] = match command {
        "numrange" | "frechet" | "lemma-harness" => &["--A"],
        "eval" | "krylov" => &["--A", "--B"],
        "eval-multi" => return Ok(vec!["--mat"; count]),
        "certify" => return Ok(["--A", "--B"].into_iter().chain(std::iter::repeat("--mat")).take(count).collect()),
        "search" => &[],
        other => return Err(CliError::Parse(format!("job: unknown command `{other}`"))),
    };
    if count > named.len() {
        return Err(CliError::Parse(format!("job: `{command}` takes at most {} matrices, got {count}", named.len())));
    }
    Ok(named[..count].to_vec())
}

fn scalar(key: &str, v: &Value) -> CliResult<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Array(items) => Ok(items.iter().map(|x| scalar(key, x)).collect::<CliResult<Vec<_>>>()?.join(",")),
        _ => Err(CliError::Parse(format!("job: unsupported value for `{key}`"))),
    }
}

impl JobSpec {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let parsed = if toml {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }

    /// The equivalent command line.
    pub fn argv(&self) -> CliResult<Vec<OsString>> {
        if self.command == "job" {
            return Err(CliError::Parse("job: nested jobs are not allowed".into()));
        }
        let mut argv: Vec<OsString> = vec!["bivarfun".into(), self.command.clone().into()];
        if let Some(f) = &self.function {
            argv.extend(["--fn".into(), f.into()]);
        }
        for (flag, path) in matrix_flags(&self.command, self.matrices.len())?.into_iter().zip(&self.matrices) {
            argv.extend([flag.into(), path.into()]);
        }
        for (key, v) in &self.params {
            let flag = format!("--{}", key.replace('_', "-"));
            match v {
                Value::Bool(true) => argv.push(flag.into()),
                Value::Bool(false) | Value::Null => {}
                other => argv.extend([flag.into(), scalar(key, other)?.into()]),
            }
        }
        if let Some(out) = &self.output {
            argv.extend(["--output".into(), out.into()]);
        }
        Ok(argv)
    }

    pub fn to_cli(&self) -> CliResult<Cli> {
        Cli::try_parse_from(self.argv()?).map_err(|e| CliError::Parse(format!("job: {e}")))
    }
}
