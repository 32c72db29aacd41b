use std::io::Write;
use std::sync::Arc;

use quest_core::scoreboard::ScoreboardService;
use quest_server::AuthConfig;

use super::stdout_error;
use crate::args::ServeArgs;
use crate::{Failure, Io};

pub const ENV_ADMIN_TOKEN: &str = "QUEST_ADMIN_TOKEN";

/// Prints the bound address on stdout, then serves until killed.
pub(super) fn serve(args: ServeArgs, env: &dyn Fn(&str) -> Option<String>, io: &mut Io<'_>) -> Result<(), Failure> {
    let service = match &args.log {
        Some(path) => ScoreboardService::open(path).map_err(|e| Failure::usage(e.to_string()))?,
        None => ScoreboardService::in_memory(),
    };
    let mut auth = AuthConfig::open();
    if let Some(token) = args
        .admin_token
        .or_else(|| env(ENV_ADMIN_TOKEN).filter(|t| !t.is_empty()))
    {
        auth = auth.with_admin_token(&token);
    }
    for token in &args.submitter_tokens {
        auth = auth.with_submitter_token(token);
    }
    if let Some(path) = &args.submitter_hashes {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        auth = auth.with_submitter_hashes(text.lines().filter(|l| !l.trim().is_empty()).map(str::to_owned));
    }

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::usage(format!("starting runtime: {e}")))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(args.listen)
            .await
            .map_err(|e| Failure::usage(format!("binding {}: {e}", args.listen)))?;
        let addr = listener.local_addr().map_err(|e| Failure::usage(e.to_string()))?;
        writeln!(io.stdout, "{addr}").map_err(stdout_error)?;
        io.stdout.flush().map_err(stdout_error)?;
        let _ = writeln!(io.stderr, "scoreboard listening on http://{addr}");
        quest_server::serve(listener, Arc::new(service), auth)
            .await
            .map_err(|e| Failure::usage(format!("server: {e}")))
    })
}
