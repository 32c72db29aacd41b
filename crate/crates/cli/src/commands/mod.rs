mod board;
mod pack;
mod run;
mod serve;
mod submit;
mod tournament;

use std::io::Write;
use std::path::PathBuf;

use quest_core::registry::Repository;

use crate::args::{Cli, Command};
use crate::client::Client;
use crate::config::{CliConfig, ConfigLayer, ENV_CONFIG};
use crate::{Failure, Io};

pub(crate) fn dispatch(cli: Cli, env: &dyn Fn(&str) -> Option<String>, io: &mut Io<'_>) -> Result<(), Failure> {
    let flags = ConfigLayer {
        repository_path: cli.repo,
        service_url: cli.service,
        token: cli.token,
        default_repetitions: None,
    };
    let config_path = cli
        .config
        .or_else(|| env(ENV_CONFIG).filter(|v| !v.is_empty()).map(PathBuf::from));
    let file = CliConfig::load_file(config_path.as_deref()).map_err(Failure::usage)?;
    let cfg = CliConfig::resolve(flags, ConfigLayer::from_env(env), file).map_err(Failure::usage)?;

    match cli.command {
        Command::Pack(args) => pack::pack(&cfg, args, io),
        Command::Search(args) => pack::search(&cfg, args, io),
        Command::Platform => {
            let platform = quest_core::runner::detect_platform();
            write_json(io, &platform)
        }
        Command::Run(args) => run::run(&cfg, args, io),
        Command::Submit(args) => submit::submit(&cfg, args, io),
        Command::Board(args) => board::board(&cfg, args, io),
        Command::Tournament(cmd) => tournament::tournament(&cfg, cmd, io),
        Command::Serve(args) => serve::serve(args, env, io),
    }
}

fn repository(cfg: &CliConfig) -> Result<Repository, Failure> {
    Ok(Repository::open(&cfg.repository_path)?)
}

fn client(cfg: &CliConfig) -> Result<Client, Failure> {
    let url = cfg
        .service_url
        .as_deref()
        .ok_or_else(|| Failure::usage("no service URL configured (use --service or QUEST_SERVICE)"))?;
    Ok(Client::new(url, cfg.token.clone()))
}

fn write_json(io: &mut Io<'_>, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::usage(e.to_string()))?;
    writeln!(io.stdout, "{text}").map_err(stdout_error)
}

fn stdout_error(e: std::io::Error) -> Failure {
    Failure::usage(format!("writing output: {e}"))
}

fn read_json_file<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Splits `key=value` (or `key:value` when `sep` is ':').
fn split_pair(raw: &str, sep: char) -> Result<(String, String), Failure> {
    match raw.split_once(sep) {
        Some((k, v)) if !k.is_empty() => Ok((k.to_owned(), v.to_owned())),
        _ => Err(Failure::usage(format!("`{raw}` is not of the form key{sep}value"))),
    }
}
