use std::io::Write;

use quest_core::scoreboard::ScoreboardView;

use super::{client, split_pair, stdout_error};
use crate::args::{BoardArgs, BoardFormat};
use crate::client::Method;
use crate::config::CliConfig;
use crate::render::render_board;
use crate::{Failure, Io};

pub(super) fn board(cfg: &CliConfig, args: BoardArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let client = client(cfg)?;
    let mut query = form_urlencoded::Serializer::new(String::new());
    query.append_pair("x", &args.x).append_pair("y", &args.y);
    query.append_pair("pending", if args.pending { "true" } else { "false" });
    for raw in &args.labels {
        let (k, v) = split_pair(raw, ':')?;
        query.append_pair("label", &format!("{k}:{v}"));
    }
    let path = format!("/v1/tournaments/{}/board?{}", args.tournament, query.finish());
    let reply = client.send(Method::Get, &path, None, 3)?;
    match args.format {
        BoardFormat::Json => {
            io.stdout.write_all(reply.body.as_bytes()).map_err(stdout_error)?;
            writeln!(io.stdout).map_err(stdout_error)
        }
        BoardFormat::Text => {
            let view: ScoreboardView = serde_json::from_str(&reply.body)
                .map_err(|e| Failure::usage(format!("unreadable board response: {e}")))?;
            io.stdout
                .write_all(render_board(&view).as_bytes())
                .map_err(stdout_error)
        }
    }
}
