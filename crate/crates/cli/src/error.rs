use std::process::ExitCode;

use thiserror::Error;

/// Failure classes, each with its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Numeric(_) => exit::NUMERIC,
            CliError::Io(_) => exit::IO,
            CliError::Parse(_) => exit::PARSE,
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Numeric(_) => "numeric error",
            CliError::Io(_) => "i/o error",
            CliError::Parse(_) => "parse error",
        }
    }
}

pub mod exit {
    pub const OK: u8 = 0;
    pub const NUMERIC: u8 = 1;
    pub const RED_FLAG: u8 = 2;
    pub const IO: u8 = 3;
    pub const PARSE: u8 = 4;
}

impl From<bivarfun::error::Error> for CliError {
    fn from(e: bivarfun::error::Error) -> Self {
        use bivarfun::error::Error as E;
        match e {
            E::Syntax { .. } | E::UnknownIdentifier { .. } | E::BadExponent { .. } | E::Format(_) => {
                CliError::Parse(e.to_string())
            }
            E::Io(msg) => CliError::Io(msg),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
