use std::io::{Read, Write};

use quest_core::pareto::MetricSpace;
use serde_json::{json, Map, Value};

use super::{client, split_pair, stdout_error};
use crate::args::SubmitArgs;
use crate::client::Method;
use crate::config::CliConfig;
use crate::{Failure, Io};

pub(super) fn submit(cfg: &CliConfig, args: SubmitArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let client = client(cfg)?;
    if cfg.token.is_none() {
        return Err(Failure::usage("no token configured (use --token or QUEST_TOKEN)"));
    }
    let text = if args.stdin {
        let mut buf = String::new();
        io.stdin
            .read_to_string(&mut buf)
            .map_err(|e| Failure::usage(format!("reading stdin: {e}")))?;
        buf
    } else {
        let path = args.file.as_ref().expect("clap requires --file without --stdin");
        std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
    };
    let input: Value = serde_json::from_str(&text).map_err(|e| Failure::usage(format!("run result: {e}")))?;

    let nonce = match args.nonce {
        Some(n) if n.len() == 16 && n.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) => n,
        Some(n) => return Err(Failure::usage(format!("nonce `{n}` must be 16 lowercase hex digits"))),
        None => format!("{:016x}", rand::random::<u64>()),
    };
    let _ = writeln!(io.stderr, "nonce: {nonce}");

    let tournament = client.json(
        Method::Get,
        &format!("/v1/tournaments/{}", args.tournament),
        None,
        args.attempts,
    )?;
    let space: MetricSpace = serde_json::from_value(tournament["space"].clone())
        .map_err(|e| Failure::usage(format!("tournament has an unreadable metric space: {e}")))?;

    let mut metrics = object(&input, "static_metrics")?;
    metrics.extend(object(&input, "metrics")?);
    let dropped: Vec<String> = metrics.keys().filter(|k| !space.contains(k)).cloned().collect();
    for key in &dropped {
        metrics.remove(key);
    }
    if !dropped.is_empty() {
        let _ = writeln!(
            io.stderr,
            "note: not in the tournament space, omitted: {}",
            dropped.join(", ")
        );
    }

    let mut labels = object(&input, "labels")?;
    for raw in &args.labels {
        let (k, v) = split_pair(raw, '=')?;
        labels.insert(k, Value::String(v));
    }
    let field = |key: &str| {
        input
            .get(key)
            .cloned()
            .ok_or_else(|| Failure::usage(format!("run result has no `{key}`")))
    };
    let body = json!({
        "workflow": field("workflow")?,
        "environment": field("environment")?,
        "metrics": metrics,
        "dispersion": input.get("dispersion").cloned().unwrap_or_else(|| json!({})),
        "labels": labels,
        "nonce": nonce,
    });

    let path = format!("/v1/tournaments/{}/submissions", args.tournament);
    let reply = client.json(Method::Post, &path, Some(&body), args.attempts)?;
    if reply["created"] == false {
        let _ = writeln!(io.stderr, "note: already submitted with this nonce");
    }
    let uid = reply["uid"]
        .as_str()
        .ok_or_else(|| Failure::usage("service reply has no uid"))?;
    writeln!(io.stdout, "{uid}").map_err(stdout_error)
}

fn object(input: &Value, key: &str) -> Result<Map<String, Value>, Failure> {
    match input.get(key) {
        None | Some(Value::Null) => Ok(Map::new()),
        Some(Value::Object(map)) => Ok(map.clone()),
        Some(_) => Err(Failure::usage(format!("`{key}` must be an object"))),
    }
}
