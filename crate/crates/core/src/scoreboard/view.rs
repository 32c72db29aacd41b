use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{ScoreboardError, ServiceState, SubmissionRecord, ValidationStatus};
use crate::pareto::{distance_to_frontier, project, projection_space, MetricVector, ParetoError, PointId};
use crate::registry::{OsFamily, Uid};

/// Board request: two display axes plus conjunctive filters.
///
/// Filter keys: `platform_label` (platform carries the label), `os_family`,
/// `cpu`, `accelerator`, `status`; any other key matches the submission's
/// free-form labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoardQuery {
    pub tournament_uid: Uid,
    pub dim_x: String,
    pub dim_y: String,
    #[serde(default)]
    pub filters: BTreeMap<String, String>,
    #[serde(default)]
    pub include_pending: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlatformSummary {
    pub cpu: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accelerator: Option<String>,
    pub os_family: OsFamily,
    #[serde(default)]
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoardPoint {
    pub uid: Uid,
    pub status: ValidationStatus,
    pub x: f64,
    pub y: f64,
    pub on_frontier: bool,
    pub distance: f64,
    pub metrics: MetricVector,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    pub platform: PlatformSummary,
    pub submitted_at: DateTime<Utc>,
}

/// Frontier-annotated 2-D view of a tournament.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreboardView {
    pub tournament_uid: Uid,
    pub dim_x: String,
    pub dim_y: String,
    pub filter: BTreeMap<String, String>,
    pub include_pending: bool,
    /// Sorted by distance, then submission time, then uid.
    pub points: Vec<BoardPoint>,
    pub generated_at: DateTime<Utc>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExportFormat {
    #[serde(rename = "csv")]
    Csv,
    #[serde(rename = "jsonl")]
    JsonLines,
}

impl std::str::FromStr for ExportFormat {
    type Err = ScoreboardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "jsonl" | "json-lines" => Ok(ExportFormat::JsonLines),
            other => Err(ScoreboardError::UnknownFormat(other.to_string())),
        }
    }
}

/// One exported submission. `on_frontier` is full-space membership among
/// validated submissions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportRow {
    pub uid: Uid,
    pub status: ValidationStatus,
    pub submitted_at: DateTime<Utc>,
    pub metrics: MetricVector,
    pub on_frontier: bool,
}

fn matches_filter(record: &SubmissionRecord, key: &str, value: &str) -> bool {
    let platform = &record.environment.platform;
    match key {
        "platform_label" => platform.labels.contains(value),
        "os_family" => platform.os_family.as_str() == value,
        "cpu" => platform.cpu == value,
        "accelerator" => platform.accelerator.as_deref() == Some(value),
        "status" => record.validation_status.as_str() == value,
        other => record.labels.get(other).is_some_and(|v| v == value),
    }
}

fn map_axis_error(e: ParetoError) -> ScoreboardError {
    match e {
        ParetoError::UnknownMetric(id) => ScoreboardError::UnknownDimension(id),
        ParetoError::SameAxis(id) => ScoreboardError::Malformed {
            field: "y".into(),
            message: format!("both axes are `{id}`"),
        },
        other => ScoreboardError::MetricMismatch(other.to_string()),
    }
}

impl ServiceState {
    pub fn query_scoreboard(
        &self,
        query: &BoardQuery,
        generated_at: DateTime<Utc>,
    ) -> Result<ScoreboardView, ScoreboardError> {
        let tournament = self.tournament(&query.tournament_uid)?;
        let plane = projection_space(&tournament.space, &query.dim_x, &query.dim_y).map_err(map_axis_error)?;
        let axes = [query.dim_x.as_str(), query.dim_y.as_str()];

        let visible: Vec<(&SubmissionRecord, MetricVector)> = self
            .submissions_of(&tournament.uid)
            .filter(|s| {
                s.validation_status == ValidationStatus::Validated
                    || (query.include_pending && s.validation_status == ValidationStatus::Pending)
            })
            .filter(|s| query.filters.iter().all(|(k, v)| matches_filter(s, k, v)))
            .filter_map(|s| s.metrics.restrict(&axes).map(|r| (s, r)))
            .collect();

        let points: Vec<(PointId, MetricVector)> =
            visible.iter().map(|(s, r)| (s.uid.to_string(), r.clone())).collect();
        let frontier = project(&points, &tournament.space, &query.dim_x, &query.dim_y).map_err(map_axis_error)?;

        let mut out = Vec::with_capacity(visible.len());
        for (record, projected) in visible {
            let distance = distance_to_frontier(&projected, &frontier, &plane).map_err(map_axis_error)?;
            let platform = &record.environment.platform;
            out.push(BoardPoint {
                uid: record.uid.clone(),
                status: record.validation_status,
                x: projected.get(&query.dim_x).expect("restricted to the axes"),
                y: projected.get(&query.dim_y).expect("restricted to the axes"),
                on_frontier: frontier.contains(record.uid.as_str()),
                distance,
                metrics: record.metrics.clone(),
                labels: record.labels.clone(),
                platform: PlatformSummary {
                    cpu: platform.cpu.clone(),
                    accelerator: platform.accelerator.clone(),
                    os_family: platform.os_family,
                    labels: platform.labels.iter().cloned().collect(),
                },
                submitted_at: record.submitted_at,
            });
        }
        out.sort_by(|a, b| {
            a.distance
                .total_cmp(&b.distance)
                .then_with(|| a.submitted_at.cmp(&b.submitted_at))
                .then_with(|| a.uid.cmp(&b.uid))
        });
        Ok(ScoreboardView {
            tournament_uid: tournament.uid.clone(),
            dim_x: query.dim_x.clone(),
            dim_y: query.dim_y.clone(),
            filter: query.filters.clone(),
            include_pending: query.include_pending,
            points: out,
            generated_at,
        })
    }

    /// Rows in (submitted_at, uid) order.
    pub fn export_rows(&self, tournament_uid: &Uid) -> Result<Vec<ExportRow>, ScoreboardError> {
        let tournament = self.tournament(tournament_uid)?;
        let frontier = &self.frontiers[&tournament.uid].validated;
        let mut rows: Vec<ExportRow> = self
            .submissions_of(&tournament.uid)
            .map(|s| ExportRow {
                uid: s.uid.clone(),
                status: s.validation_status,
                submitted_at: s.submitted_at,
                metrics: s.metrics.clone(),
                on_frontier: frontier.contains(s.uid.as_str()),
            })
            .collect();
        rows.sort_by(|a, b| a.submitted_at.cmp(&b.submitted_at).then_with(|| a.uid.cmp(&b.uid)));
        Ok(rows)
    }

    /// CSV columns: `uid,status,submitted_at,<metric ids in space order>,on_frontier`;
    /// a missing metric is an empty cell. JSON lines carry the same fields
    /// with metrics as an object.
    pub fn export(&self, tournament_uid: &Uid, format: ExportFormat) -> Result<Vec<u8>, ScoreboardError> {
        let rows = self.export_rows(tournament_uid)?;
        match format {
            ExportFormat::JsonLines => {
                let mut out = Vec::new();
                for row in &rows {
                    serde_json::to_writer(&mut out, row).expect("rows serialize");
                    out.push(b'\n');
                }
                Ok(out)
            }
            ExportFormat::Csv => {
                let space = &self.tournaments[tournament_uid].space;
                let mut writer = csv::Writer::from_writer(Vec::new());
                let mut header = vec!["uid", "status", "submitted_at"];
                header.extend(space.ids());
                header.push("on_frontier");
                let csv_err = |e: csv::Error| ScoreboardError::Log(format!("csv export: {e}"));
                writer.write_record(&header).map_err(csv_err)?;
                for row in &rows {
                    let mut record = vec![
                        row.uid.to_string(),
                        row.status.to_string(),
                        row.submitted_at.to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
                    ];
                    record.extend(
                        space
                            .ids()
                            .map(|id| row.metrics.get(id).map(|v| v.to_string()).unwrap_or_default()),
                    );
                    record.push(row.on_frontier.to_string());
                    writer.write_record(&record).map_err(csv_err)?;
                }
                writer
                    .into_inner()
                    .map_err(|e| ScoreboardError::Log(format!("csv export: {e}")))
            }
        }
    }
}

/// Reads back a JSON-lines export.
pub fn parse_export_jsonl(bytes: &[u8]) -> Result<Vec<ExportRow>, serde_json::Error> {
    serde_json::Deserializer::from_slice(bytes).into_iter().collect()
}
