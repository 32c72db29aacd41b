use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Event, LogEntry, ScoreboardError, SubmissionRecord, Tournament, TournamentStatus, ValidationStatus};
use crate::pareto::{compute_frontier, MetricVector, ParetoFrontier, PointId};
use crate::registry::Uid;

/// Full-space frontiers kept up to date as events are applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontierCache {
    /// Pending and validated submissions.
    pub live: ParetoFrontier,
    /// Validated submissions only.
    pub validated: ParetoFrontier,
}

/// Everything the scoreboard knows; a deterministic fold over the log.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ServiceState {
    pub last_seq: u64,
    pub tournaments: BTreeMap<Uid, Tournament>,
    pub submissions: BTreeMap<Uid, SubmissionRecord>,
    pub frontiers: BTreeMap<Uid, FrontierCache>,
    /// (submitter token hash, nonce) -> submission; derived, not serialized.
    #[serde(skip)]
    nonces: BTreeMap<(String, String), Uid>,
}

impl ServiceState {
    /// Stable serialization used to compare states byte for byte.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("state serializes")
    }

    pub fn tournament(&self, uid: &Uid) -> Result<&Tournament, ScoreboardError> {
        self.tournaments
            .get(uid)
            .ok_or_else(|| ScoreboardError::UnknownTournament(uid.clone()))
    }

    pub fn submission(&self, uid: &Uid) -> Result<&SubmissionRecord, ScoreboardError> {
        self.submissions
            .get(uid)
            .ok_or_else(|| ScoreboardError::UnknownSubmission(uid.clone()))
    }

    pub fn submissions_of<'a>(&'a self, tournament: &'a Uid) -> impl Iterator<Item = &'a SubmissionRecord> + 'a {
        self.submissions
            .values()
            .filter(move |s| &s.tournament_uid == tournament)
    }

    pub fn find_by_nonce(&self, token_hash: &str, nonce: &str) -> Option<&Uid> {
        self.nonces.get(&(token_hash.to_string(), nonce.to_string()))
    }

    /// Rejects events that would violate a lifecycle or consistency rule.
    pub fn check(&self, event: &Event) -> Result<(), ScoreboardError> {
        match event {
            Event::TournamentCreated(t) => {
                if self.tournaments.contains_key(&t.uid) {
                    return Err(ScoreboardError::DuplicateUid(t.uid.clone()));
                }
                if t.opens_at >= t.closes_at {
                    return Err(ScoreboardError::InvalidWindow {
                        opens_at: t.opens_at,
                        closes_at: t.closes_at,
                    });
                }
                if t.title.trim().is_empty() {
                    return Err(ScoreboardError::Malformed {
                        field: "title".into(),
                        message: "must not be empty".into(),
                    });
                }
                if t.status != TournamentStatus::Draft {
                    return Err(ScoreboardError::Malformed {
                        field: "status".into(),
                        message: "new tournaments start as draft".into(),
                    });
                }
                Ok(())
            }
            Event::TournamentOpened { uid } => self.expect_status(uid, TournamentStatus::Draft, "open"),
            Event::TournamentClosed { uid } => self.expect_status(uid, TournamentStatus::Open, "close"),
            Event::SubmissionAccepted(record) => {
                let t = self.tournament(&record.tournament_uid)?;
                if t.status != TournamentStatus::Open {
                    return Err(ScoreboardError::TournamentNotOpen {
                        uid: t.uid.clone(),
                        status: t.status,
                    });
                }
                if self.submissions.contains_key(&record.uid) {
                    return Err(ScoreboardError::DuplicateUid(record.uid.clone()));
                }
                if record.validation_status != ValidationStatus::Pending {
                    return Err(ScoreboardError::Malformed {
                        field: "validation_status".into(),
                        message: "new submissions start as pending".into(),
                    });
                }
                if record.metrics.is_empty() {
                    return Err(ScoreboardError::Malformed {
                        field: "metrics".into(),
                        message: "at least one metric is required".into(),
                    });
                }
                record
                    .metrics
                    .validate(&t.space)
                    .map_err(|e| ScoreboardError::MetricMismatch(e.to_string()))?;
                if let Some(nonce) = &record.nonce {
                    if self.find_by_nonce(&record.submitter_token_hash, nonce).is_some() {
                        return Err(ScoreboardError::Malformed {
                            field: "nonce".into(),
                            message: "nonce already used".into(),
                        });
                    }
                }
                Ok(())
            }
            Event::StatusChanged {
                submission_uid,
                from,
                to,
                ..
            } => {
                let current = self.submission(submission_uid)?.validation_status;
                if current != *from || !from.can_become(*to) {
                    return Err(ScoreboardError::ForbiddenTransition { from: current, to: *to });
                }
                Ok(())
            }
        }
    }

    fn expect_status(
        &self,
        uid: &Uid,
        expected: TournamentStatus,
        action: &'static str,
    ) -> Result<(), ScoreboardError> {
        let t = self.tournament(uid)?;
        if t.status != expected {
            return Err(ScoreboardError::TournamentTransition {
                uid: uid.clone(),
                status: t.status,
                action,
            });
        }
        Ok(())
    }

    /// Checks and applies one log entry.
    pub fn apply(&mut self, entry: &LogEntry) -> Result<(), ScoreboardError> {
        if entry.seq != self.last_seq + 1 {
            return Err(ScoreboardError::LogCorrupt {
                offset: 0,
                reason: format!("expected seq {}, got {}", self.last_seq + 1, entry.seq),
            });
        }
        self.check(&entry.event)?;
        match &entry.event {
            Event::TournamentCreated(t) => {
                self.frontiers.insert(
                    t.uid.clone(),
                    FrontierCache {
                        live: ParetoFrontier::empty(t.space.clone()),
                        validated: ParetoFrontier::empty(t.space.clone()),
                    },
                );
                self.tournaments.insert(t.uid.clone(), t.clone());
            }
            Event::TournamentOpened { uid } => {
                self.tournaments.get_mut(uid).expect("checked").status = TournamentStatus::Open;
            }
            Event::TournamentClosed { uid } => {
                self.tournaments.get_mut(uid).expect("checked").status = TournamentStatus::Closed;
            }
            Event::SubmissionAccepted(record) => {
                let space = &self.tournaments[&record.tournament_uid].space;
                if record.metrics.covers(space) {
                    let cache = self
                        .frontiers
                        .get_mut(&record.tournament_uid)
                        .expect("created with tournament");
                    cache
                        .live
                        .insert(record.uid.to_string(), record.metrics.clone())
                        .expect("metric set checked against the space");
                }
                if let Some(nonce) = &record.nonce {
                    self.nonces
                        .insert((record.submitter_token_hash.clone(), nonce.clone()), record.uid.clone());
                }
                self.submissions.insert(record.uid.clone(), (**record).clone());
            }
            Event::StatusChanged {
                submission_uid,
                from,
                to,
                note,
            } => {
                let record = self.submissions.get_mut(submission_uid).expect("checked");
                record.validation_status = *to;
                record.status_history.push(super::StatusChange {
                    from: *from,
                    to: *to,
                    note: note.clone(),
                    at: entry.recorded_at,
                });
                let tournament = record.tournament_uid.clone();
                let uid = record.uid.to_string();
                let metrics = record.metrics.clone();
                let covers = metrics.covers(&self.tournaments[&tournament].space);
                match to {
                    ValidationStatus::Validated if covers => {
                        let cache = self.frontiers.get_mut(&tournament).expect("created with tournament");
                        cache
                            .validated
                            .insert(uid, metrics)
                            .expect("metric set checked against the space");
                    }
                    ValidationStatus::Validated | ValidationStatus::Pending => {}
                    ValidationStatus::Rejected | ValidationStatus::Unreproducible => {
                        // removals cannot be applied incrementally
                        self.recompute_frontiers(&tournament);
                    }
                }
            }
        }
        self.last_seq = entry.seq;
        Ok(())
    }

    /// Batch frontier over the tournament's submissions whose status passes
    /// `eligible` and whose metrics cover the whole space.
    pub fn batch_frontier(&self, tournament: &Uid, eligible: impl Fn(ValidationStatus) -> bool) -> ParetoFrontier {
        let space = &self.tournaments[tournament].space;
        let points: Vec<(PointId, MetricVector)> = self
            .submissions_of(tournament)
            .filter(|s| eligible(s.validation_status) && s.metrics.covers(space))
            .map(|s| (s.uid.to_string(), s.metrics.clone()))
            .collect();
        compute_frontier(&points, space).expect("stored metrics are consistent with the space")
    }

    fn recompute_frontiers(&mut self, tournament: &Uid) {
        let cache = FrontierCache {
            live: self.batch_frontier(tournament, ValidationStatus::is_live),
            validated: self.batch_frontier(tournament, |s| s == ValidationStatus::Validated),
        };
        self.frontiers.insert(tournament.clone(), cache);
    }
}
