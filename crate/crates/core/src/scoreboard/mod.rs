//! Tournament scoreboard: event-sourced state, frontier caches, board
//! queries and exports.

mod events;
mod model;
mod service;
mod state;
mod view;

use chrono::{DateTime, Utc};
use thiserror::Error;

pub use events::{parse_log, replay_bytes, replay_log, Event, EventLog, LogEntry};
pub use model::{
    NewTournament, StatusChange, SubmissionRecord, SubmissionRequest, Tournament, TournamentStatus, ValidationStatus,
};
pub use service::{hash_token, ScoreboardService, SubmitOutcome};
pub use state::{FrontierCache, ServiceState};
pub use view::{parse_export_jsonl, BoardPoint, BoardQuery, ExportFormat, ExportRow, PlatformSummary, ScoreboardView};

use crate::registry::Uid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreboardError {
    #[error("unknown tournament {0}")]
    UnknownTournament(Uid),
    #[error("unknown submission {0}")]
    UnknownSubmission(Uid),
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
    #[error("tournament window is inverted: opens {opens_at}, closes {closes_at}")]
    InvalidWindow {
        opens_at: DateTime<Utc>,
        closes_at: DateTime<Utc>,
    },
    #[error("tournament {uid} is {status}; cannot {action} it")]
    TournamentTransition {
        uid: Uid,
        status: TournamentStatus,
        action: &'static str,
    },
    #[error("tournament {uid} is {status}, not open for submissions")]
    TournamentNotOpen { uid: Uid, status: TournamentStatus },
    #[error("status change {from} -> {to} is not allowed")]
    ForbiddenTransition {
        from: ValidationStatus,
        to: ValidationStatus,
    },
    #[error("metrics do not fit the tournament space: {0}")]
    MetricMismatch(String),
    #[error("{field}: {message}")]
    Malformed { field: String, message: String },
    #[error("uid {0} already exists")]
    DuplicateUid(Uid),
    #[error("unknown export format `{0}` (expected csv or jsonl)")]
    UnknownFormat(String),
    #[error("event log: {0}")]
    Log(String),
    #[error("corrupt event log at byte {offset}: {reason}")]
    LogCorrupt { offset: usize, reason: String },
}

impl ScoreboardError {
    /// Field the error refers to, when it is about caller input.
    pub fn field(&self) -> Option<&str> {
        match self {
            ScoreboardError::Malformed { field, .. } => Some(field),
            ScoreboardError::MetricMismatch(_) => Some("metrics"),
            ScoreboardError::InvalidWindow { .. } => Some("closes_at"),
            ScoreboardError::UnknownDimension(_) => Some("dimension"),
            ScoreboardError::UnknownFormat(_) => Some("format"),
            _ => None,
        }
    }
}
