use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{ScoreboardError, ServiceState, SubmissionRecord, Tournament, ValidationStatus};
use crate::registry::Uid;

/// A state-changing fact. Serialized as `kind` + `payload`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Event {
    TournamentCreated(Tournament),
    TournamentOpened {
        uid: Uid,
    },
    TournamentClosed {
        uid: Uid,
    },
    SubmissionAccepted(Box<SubmissionRecord>),
    StatusChanged {
        submission_uid: Uid,
        from: ValidationStatus,
        to: ValidationStatus,
        note: String,
    },
}

/// One line of the event log: `{seq, kind, payload, recorded_at}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    #[serde(flatten)]
    pub event: Event,
    pub recorded_at: DateTime<Utc>,
}

impl LogEntry {
    pub fn to_line(&self) -> Vec<u8> {
        let mut line = serde_json::to_vec(self).expect("log entries serialize");
        line.push(b'\n');
        line
    }
}

#[derive(Debug)]
enum Sink {
    File { file: File, path: PathBuf },
    Memory(Vec<u8>),
}

/// Append-only JSON-lines writer. Bytes already written are never touched.
#[derive(Debug)]
pub struct EventLog {
    sink: Sink,
}

impl EventLog {
    pub fn in_memory() -> Self {
        Self {
            sink: Sink::Memory(Vec::new()),
        }
    }

    /// Opens `path` for appending, creating it if missing.
    pub fn open(path: &Path) -> Result<Self, ScoreboardError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| ScoreboardError::Log(format!("{}: {e}", path.display())))?;
        Ok(Self {
            sink: Sink::File {
                file,
                path: path.to_path_buf(),
            },
        })
    }

    pub fn append(&mut self, entry: &LogEntry) -> Result<(), ScoreboardError> {
        let line = entry.to_line();
        match &mut self.sink {
            Sink::Memory(buf) => buf.extend_from_slice(&line),
            Sink::File { file, path } => {
                file.write_all(&line)
                    .and_then(|()| file.sync_data())
                    .map_err(|e| ScoreboardError::Log(format!("{}: {e}", path.display())))?;
            }
        }
        Ok(())
    }

    /// The in-memory log contents, or `None` for file-backed logs.
    pub fn memory_bytes(&self) -> Option<&[u8]> {
        match &self.sink {
            Sink::Memory(buf) => Some(buf),
            Sink::File { .. } => None,
        }
    }
}

/// Parses a log into `(byte offset, entry)` pairs. Any malformed,
/// out-of-sequence or truncated line aborts with its byte offset.
pub fn parse_log(bytes: &[u8]) -> Result<Vec<(usize, LogEntry)>, ScoreboardError> {
    let mut entries = Vec::new();
    let mut offset = 0usize;
    while offset < bytes.len() {
        let rest = &bytes[offset..];
        let Some(len) = rest.iter().position(|&b| b == b'\n') else {
            return Err(ScoreboardError::LogCorrupt {
                offset,
                reason: "truncated record (no trailing newline)".into(),
            });
        };
        let entry: LogEntry = serde_json::from_slice(&rest[..len]).map_err(|e| ScoreboardError::LogCorrupt {
            offset,
            reason: e.to_string(),
        })?;
        let expected = entries.len() as u64 + 1;
        if entry.seq != expected {
            return Err(ScoreboardError::LogCorrupt {
                offset,
                reason: format!("expected seq {expected}, found {}", entry.seq),
            });
        }
        entries.push((offset, entry));
        offset += len + 1;
    }
    Ok(entries)
}

/// Rebuilds service state from raw log bytes.
pub fn replay_bytes(bytes: &[u8]) -> Result<ServiceState, ScoreboardError> {
    let mut state = ServiceState::default();
    for (offset, entry) in parse_log(bytes)? {
        state.apply(&entry).map_err(|e| ScoreboardError::LogCorrupt {
            offset,
            reason: format!("event {} cannot be applied: {e}", entry.seq),
        })?;
    }
    Ok(state)
}

/// Rebuilds service state from the log file at `path`.
pub fn replay_log(path: &Path) -> Result<ServiceState, ScoreboardError> {
    let bytes = fs::read(path).map_err(|e| ScoreboardError::Log(format!("{}: {e}", path.display())))?;
    replay_bytes(&bytes)
}
