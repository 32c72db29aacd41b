use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, SubsecRound, Utc};
use sha2::{Digest, Sha256};

use super::{
    replay_bytes, BoardQuery, Event, EventLog, ExportFormat, LogEntry, NewTournament, ScoreboardError, ScoreboardView,
    ServiceState, SubmissionRecord, SubmissionRequest, Tournament, TournamentStatus, ValidationStatus,
};
use crate::registry::Uid;

/// Hex SHA-256 of a bearer token; raw tokens are never stored.
pub fn hash_token(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

type Clock = Box<dyn Fn() -> DateTime<Utc> + Send + Sync>;

/// Result of a submit call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubmitOutcome {
    pub uid: Uid,
    /// False when the nonce matched an earlier submission.
    pub created: bool,
}

/// The scoreboard: an append-only event log plus in-memory indexes.
///
/// Mutations are funneled through one lock so the log order is the
/// linearization order. Readers clone an `Arc` snapshot and never observe a
/// half-applied event.
pub struct ScoreboardService {
    state: RwLock<Arc<ServiceState>>,
    log: Mutex<EventLog>,
    clock: Clock,
}

fn default_clock() -> DateTime<Utc> {
    Utc::now().trunc_subsecs(3)
}

impl ScoreboardService {
    pub fn in_memory() -> Self {
        Self {
            state: RwLock::new(Arc::new(ServiceState::default())),
            log: Mutex::new(EventLog::in_memory()),
            clock: Box::new(default_clock),
        }
    }

    /// Replays the log at `path` (if any) and continues appending to it.
    pub fn open(path: &Path) -> Result<Self, ScoreboardError> {
        let state = if path.exists() {
            let bytes = std::fs::read(path).map_err(|e| ScoreboardError::Log(format!("{}: {e}", path.display())))?;
            replay_bytes(&bytes)?
        } else {
            ServiceState::default()
        };
        Ok(Self {
            state: RwLock::new(Arc::new(state)),
            log: Mutex::new(EventLog::open(path)?),
            clock: Box::new(default_clock),
        })
    }

    pub fn with_clock(mut self, clock: impl Fn() -> DateTime<Utc> + Send + Sync + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    /// Immutable view of the current state.
    pub fn snapshot(&self) -> Arc<ServiceState> {
        self.state.read().expect("state lock").clone()
    }

    /// Contents of an in-memory log; `None` when backed by a file.
    pub fn log_bytes(&self) -> Option<Vec<u8>> {
        self.log.lock().expect("log lock").memory_bytes().map(<[u8]>::to_vec)
    }

    /// Builds an event against the current state, appends it, then
    /// publishes the new state. `build` returns `Ok(Err(t))` to finish
    /// without writing.
    fn commit<T>(
        &self,
        build: impl FnOnce(&ServiceState, DateTime<Utc>) -> Result<Result<Event, T>, ScoreboardError>,
    ) -> Result<Result<LogEntry, T>, ScoreboardError> {
        let mut log = self.log.lock().expect("log lock");
        let now = (self.clock)();
        let current = self.snapshot();
        let event = match build(&current, now)? {
            Ok(event) => event,
            Err(short_circuit) => return Ok(Err(short_circuit)),
        };
        current.check(&event)?;
        let entry = LogEntry {
            seq: current.last_seq + 1,
            event,
            recorded_at: now,
        };
        drop(current);
        log.append(&entry)?;
        let mut guard = self.state.write().expect("state lock");
        Arc::make_mut(&mut guard)
            .apply(&entry)
            .expect("event was checked against the same state");
        Ok(Ok(entry))
    }

    pub fn create_tournament(&self, new: NewTournament) -> Result<Tournament, ScoreboardError> {
        let tournament = Tournament {
            uid: Uid::generate(),
            title: new.title,
            space: new.space,
            opens_at: new.opens_at,
            closes_at: new.closes_at,
            status: TournamentStatus::Draft,
        };
        self.commit::<()>(|_, _| Ok(Ok(Event::TournamentCreated(tournament.clone()))))?
            .expect("never short-circuits");
        Ok(tournament)
    }

    pub fn open_tournament(&self, uid: &Uid) -> Result<Tournament, ScoreboardError> {
        self.commit::<()>(|_, _| Ok(Ok(Event::TournamentOpened { uid: uid.clone() })))?
            .expect("never short-circuits");
        Ok(self.snapshot().tournament(uid)?.clone())
    }

    pub fn close_tournament(&self, uid: &Uid) -> Result<Tournament, ScoreboardError> {
        self.commit::<()>(|_, _| Ok(Ok(Event::TournamentClosed { uid: uid.clone() })))?
            .expect("never short-circuits");
        Ok(self.snapshot().tournament(uid)?.clone())
    }

    /// Appends a pending submission. A repeated (token, nonce) pair returns
    /// the original uid without writing anything.
    pub fn submit(
        &self,
        tournament_uid: &Uid,
        request: SubmissionRequest,
        submitter_token_hash: &str,
    ) -> Result<SubmitOutcome, ScoreboardError> {
        if let Some(nonce) = &request.nonce {
            if !crate::registry::Uid::is_valid(nonce) {
                return Err(ScoreboardError::Malformed {
                    field: "nonce".into(),
                    message: "expected 16 lowercase hex characters".into(),
                });
            }
        }
        request.workflow.check().map_err(|e| ScoreboardError::Malformed {
            field: "workflow".into(),
            message: e.to_string(),
        })?;
        let outcome = self.commit(|state, now| {
            if let Some(nonce) = &request.nonce {
                if let Some(existing) = state.find_by_nonce(submitter_token_hash, nonce) {
                    return Ok(Err(existing.clone()));
                }
            }
            let uid = loop {
                let candidate = Uid::generate();
                if !state.submissions.contains_key(&candidate) {
                    break candidate;
                }
            };
            Ok(Ok(Event::SubmissionAccepted(Box::new(SubmissionRecord {
                uid,
                tournament_uid: tournament_uid.clone(),
                workflow: request.workflow,
                environment: request.environment,
                metrics: request.metrics,
                dispersion: request.dispersion,
                submitter_token_hash: submitter_token_hash.to_string(),
                validation_status: ValidationStatus::Pending,
                submitted_at: now,
                labels: request.labels,
                nonce: request.nonce,
                status_history: Vec::new(),
            }))))
        })?;
        Ok(match outcome {
            Ok(entry) => match entry.event {
                Event::SubmissionAccepted(record) => SubmitOutcome {
                    uid: record.uid,
                    created: true,
                },
                _ => unreachable!("submit only appends submissions"),
            },
            Err(existing) => SubmitOutcome {
                uid: existing,
                created: false,
            },
        })
    }

    pub fn set_validation_status(
        &self,
        submission_uid: &Uid,
        new_status: ValidationStatus,
        note: impl Into<String>,
    ) -> Result<SubmissionRecord, ScoreboardError> {
        let note = note.into();
        self.commit::<()>(|state, _| {
            let from = state.submission(submission_uid)?.validation_status;
            Ok(Ok(Event::StatusChanged {
                submission_uid: submission_uid.clone(),
                from,
                to: new_status,
                note,
            }))
        })?
        .expect("never short-circuits");
        Ok(self.snapshot().submission(submission_uid)?.clone())
    }

    pub fn query_scoreboard(&self, query: &BoardQuery) -> Result<ScoreboardView, ScoreboardError> {
        self.snapshot().query_scoreboard(query, (self.clock)())
    }

    pub fn export(&self, tournament_uid: &Uid, format: ExportFormat) -> Result<Vec<u8>, ScoreboardError> {
        self.snapshot().export(tournament_uid, format)
    }
}
