//! `quest`: package artifacts, run workflows, submit results and render
//! tournament boards.
//!
//! Exit codes: 0 success, 1 usage or rejected request, 2 every repetition
//! of a run failed, 3 the scoreboard service could not be reached.

pub mod args;
mod client;
mod commands;
pub mod config;
mod render;

use std::ffi::OsString;
use std::io::{self, Read, Write};

use clap::Parser;

pub use args::Cli;
pub use client::{Client, ClientError, Method, Reply};
pub use config::{CliConfig, ConfigLayer};
pub use render::render_board;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_AGGREGATION: i32 = 2;
pub const EXIT_NETWORK: i32 = 3;

/// Command failure carrying its exit code and a stderr message.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_FAILURE, message)
    }
}

impl From<quest_core::registry::RegistryError> for Failure {
    fn from(err: quest_core::registry::RegistryError) -> Self {
        Failure::usage(err.to_string())
    }
}

impl From<ClientError> for Failure {
    fn from(err: ClientError) -> Self {
        match err {
            ClientError::Network(message) => Failure::new(EXIT_NETWORK, format!("service unreachable: {message}")),
            ClientError::Service {
                status, message, field, ..
            } if status >= 500 => {
                let mut m = format!("service error ({status}): {message}");
                if let Some(f) = field {
                    m.push_str(&format!(" [field: {f}]"));
                }
                Failure::new(EXIT_NETWORK, m)
            }
            ClientError::Service { message, field, .. } => match field {
                Some(f) => Failure::usage(format!("{message} [field: {f}]")),
                None => Failure::usage(message),
            },
        }
    }
}

/// Standard streams, swappable for in-process tests.
pub struct Io<'a> {
    pub stdin: Box<dyn Read + 'a>,
    pub stdout: Box<dyn Write + 'a>,
    pub stderr: Box<dyn Write + 'a>,
}

impl Io<'static> {
    pub fn std() -> Self {
        Io {
            stdin: Box::new(io::stdin()),
            stdout: Box::new(io::stdout()),
            stderr: Box::new(io::stderr()),
        }
    }
}

/// Parses `args` and runs the command. `env` supplies environment variables.
pub fn run<I, T>(args: I, env: &dyn Fn(&str) -> Option<String>, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
            let text = err.render().to_string();
            let _ = if err.use_stderr() {
                io.stderr.write_all(text.as_bytes())
            } else {
                io.stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = commands::dispatch(cli, env, io);
    let _ = io.stdout.flush();
    match result {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = writeln!(io.stderr, "error: {}", failure.message);
            failure.code
        }
    }
}
