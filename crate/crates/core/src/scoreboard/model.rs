use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::pareto::{MetricSpace, MetricVector};
use crate::registry::Uid;
use crate::runner::{DispersionReport, EnvironmentSnapshot, WorkflowDescriptor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TournamentStatus {
    Draft,
    Open,
    Closed,
}

impl fmt::Display for TournamentStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TournamentStatus::Draft => "draft",
            TournamentStatus::Open => "open",
            TournamentStatus::Closed => "closed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tournament {
    pub uid: Uid,
    pub title: String,
    pub space: MetricSpace,
    pub opens_at: DateTime<Utc>,
    pub closes_at: DateTime<Utc>,
    pub status: TournamentStatus,
}

/// Artifact-evaluation status of a submission.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationStatus {
    Pending,
    Validated,
    Rejected,
    Unreproducible,
}

impl ValidationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ValidationStatus::Pending => "pending",
            ValidationStatus::Validated => "validated",
            ValidationStatus::Rejected => "rejected",
            ValidationStatus::Unreproducible => "unreproducible",
        }
    }

    /// pending -> validated | rejected | unreproducible, and
    /// validated -> unreproducible after a post-hoc audit.
    pub fn can_become(self, next: ValidationStatus) -> bool {
        use ValidationStatus::*;
        matches!(
            (self, next),
            (Pending, Validated) | (Pending, Rejected) | (Pending, Unreproducible) | (Validated, Unreproducible)
        )
    }

    /// Whether submissions in this status compete on the live board.
    pub fn is_live(self) -> bool {
        matches!(self, ValidationStatus::Pending | ValidationStatus::Validated)
    }
}

impl fmt::Display for ValidationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ValidationStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use ValidationStatus::*;
        [Pending, Validated, Rejected, Unreproducible]
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown validation status `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatusChange {
    pub from: ValidationStatus,
    pub to: ValidationStatus,
    pub note: String,
    pub at: DateTime<Utc>,
}

/// One scored run in a tournament.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmissionRecord {
    pub uid: Uid,
    pub tournament_uid: Uid,
    pub workflow: WorkflowDescriptor,
    pub environment: EnvironmentSnapshot,
    pub metrics: MetricVector,
    #[serde(default)]
    pub dispersion: DispersionReport,
    pub submitter_token_hash: String,
    pub validation_status: ValidationStatus,
    pub submitted_at: DateTime<Utc>,
    /// Free-form facets (framework, model, ...) used by board filters.
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonce: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub status_history: Vec<StatusChange>,
}

/// Client-supplied part of a submission; the service assigns the rest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmissionRequest {
    pub workflow: WorkflowDescriptor,
    pub environment: EnvironmentSnapshot,
    pub metrics: MetricVector,
    #[serde(default)]
    pub dispersion: DispersionReport,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonce: Option<String>,
}

/// Arguments of `create_tournament`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewTournament {
    pub title: String,
    #[serde(default = "MetricSpace::canonical")]
    pub space: MetricSpace,
    pub opens_at: DateTime<Utc>,
    pub closes_at: DateTime<Utc>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use ValidationStatus::*;

    #[test]
    fn transition_relation() {
        let all = [Pending, Validated, Rejected, Unreproducible];
        let allowed: Vec<_> = all
            .iter()
            .flat_map(|a| all.iter().map(move |b| (*a, *b)))
            .filter(|(a, b)| a.can_become(*b))
            .collect();
        assert_eq!(
            allowed,
            vec![
                (Pending, Validated),
                (Pending, Rejected),
                (Pending, Unreproducible),
                (Validated, Unreproducible)
            ]
        );
    }
}
