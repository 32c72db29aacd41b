use std::io::Write;

use chrono::{DateTime, Duration, Utc};
use quest_core::pareto::MetricSpace;
use serde_json::{json, Value};

use super::{client, read_json_file, stdout_error, write_json};
use crate::args::{ExportArg, TournamentCommand};
use crate::client::Method;
use crate::config::CliConfig;
use crate::{Failure, Io};

fn parse_time(flag: &str, raw: &str) -> Result<DateTime<Utc>, Failure> {
    DateTime::parse_from_rfc3339(raw)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Failure::usage(format!("--{flag} `{raw}`: {e}")))
}

pub(super) fn tournament(cfg: &CliConfig, cmd: TournamentCommand, io: &mut Io<'_>) -> Result<(), Failure> {
    let client = client(cfg)?;
    match cmd {
        TournamentCommand::Create {
            title,
            opens,
            closes,
            days,
            space,
            open,
        } => {
            let opens_at = match opens {
                Some(raw) => parse_time("opens", &raw)?,
                None => Utc::now(),
            };
            let closes_at = match closes {
                Some(raw) => parse_time("closes", &raw)?,
                None => opens_at + Duration::days(days),
            };
            let space = match space {
                Some(path) => read_json_file::<MetricSpace>(&path)?,
                None => MetricSpace::canonical(),
            };
            let body = json!({"title": title, "space": space, "opens_at": opens_at, "closes_at": closes_at});
            let created = client.json(Method::Post, "/v1/tournaments", Some(&body), 1)?;
            let uid = created["uid"]
                .as_str()
                .ok_or_else(|| Failure::usage("service reply has no uid"))?;
            if open {
                client.send(Method::Post, &format!("/v1/tournaments/{uid}/open"), None, 1)?;
            }
            writeln!(io.stdout, "{uid}").map_err(stdout_error)
        }
        TournamentCommand::Show { uid } => {
            let t = client.json(Method::Get, &format!("/v1/tournaments/{uid}"), None, 3)?;
            write_json(io, &t)
        }
        TournamentCommand::Open { uid } => {
            let t = client.json(Method::Post, &format!("/v1/tournaments/{uid}/open"), None, 1)?;
            write_json(io, &t)
        }
        TournamentCommand::Close { uid } => {
            let t = client.json(Method::Post, &format!("/v1/tournaments/{uid}/close"), None, 1)?;
            write_json(io, &t)
        }
        TournamentCommand::SetStatus {
            submission,
            status,
            note,
        } => {
            let body = json!({"status": status, "note": note});
            let record: Value = client.json(
                Method::Patch,
                &format!("/v1/submissions/{submission}/status"),
                Some(&body),
                1,
            )?;
            write_json(io, &record)
        }
        TournamentCommand::Export { uid, format } => {
            let format = match format {
                ExportArg::Csv => "csv",
                ExportArg::Jsonl => "jsonl",
            };
            let reply = client.send(
                Method::Get,
                &format!("/v1/tournaments/{uid}/export?format={format}"),
                None,
                3,
            )?;
            io.stdout.write_all(reply.body.as_bytes()).map_err(stdout_error)
        }
    }
}
