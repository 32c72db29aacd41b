//! HTTP/JSON API over a [`ScoreboardService`].
//!
//! Routes live under `/v1`. Every error body is `{code, message, field?}`.
//! Mutating handlers run on the blocking pool because the event log syncs
//! each append to disk.

mod error;
mod routes;

use std::collections::BTreeSet;
use std::sync::Arc;

use axum::Router;
use quest_core::scoreboard::{hash_token, ScoreboardService};
use tokio::net::TcpListener;

pub use error::ApiError;

/// Bearer-token policy. Tokens are held only as SHA-256 hex digests.
///
/// An empty admin set leaves tournament and status management open; an empty
/// submitter set accepts any bearer token for submissions. Submissions always
/// need some token because its digest identifies the submitter.
#[derive(Debug, Clone, Default)]
pub struct AuthConfig {
    admin_hashes: BTreeSet<String>,
    submitter_hashes: BTreeSet<String>,
}

impl AuthConfig {
    pub fn open() -> Self {
        Self::default()
    }

    pub fn with_admin_token(mut self, token: &str) -> Self {
        self.admin_hashes.insert(hash_token(token));
        self
    }

    pub fn with_submitter_token(mut self, token: &str) -> Self {
        self.submitter_hashes.insert(hash_token(token));
        self
    }

    /// Adds already-hashed submitter digests, as stored in a token file.
    pub fn with_submitter_hashes(mut self, hashes: impl IntoIterator<Item = String>) -> Self {
        self.submitter_hashes
            .extend(hashes.into_iter().map(|h| h.trim().to_ascii_lowercase()));
        self
    }

    fn admin_allows(&self, token: Option<&str>) -> bool {
        self.admin_hashes.is_empty() || token.is_some_and(|t| self.admin_hashes.contains(&hash_token(t)))
    }

    fn submitter_allows(&self, token_hash: &str) -> bool {
        self.submitter_hashes.is_empty() || self.submitter_hashes.contains(token_hash)
    }
}

#[derive(Clone)]
struct AppState {
    service: Arc<ScoreboardService>,
    auth: Arc<AuthConfig>,
}

pub fn router(service: Arc<ScoreboardService>, auth: AuthConfig) -> Router {
    routes::build(AppState {
        service,
        auth: Arc::new(auth),
    })
}

/// Serves the API on an already-bound listener until the future is dropped
/// or the listener fails.
pub async fn serve(listener: TcpListener, service: Arc<ScoreboardService>, auth: AuthConfig) -> std::io::Result<()> {
    axum::serve(listener, router(service, auth)).await
}
