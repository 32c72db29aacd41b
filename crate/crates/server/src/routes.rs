use std::collections::BTreeMap;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use quest_core::registry::Uid;
use quest_core::scoreboard::{
    hash_token, BoardQuery, ExportFormat, NewTournament, ScoreboardService, SubmissionRequest, ValidationStatus,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;

use crate::{ApiError, AppState};

type ApiResult = Result<Response, ApiError>;

pub(crate) fn build(state: AppState) -> Router {
    Router::new()
        .route("/v1/healthz", get(healthz))
        .route("/v1/tournaments", post(create_tournament))
        .route("/v1/tournaments/{uid}", get(get_tournament))
        .route("/v1/tournaments/{uid}/open", post(open_tournament))
        .route("/v1/tournaments/{uid}/close", post(close_tournament))
        .route("/v1/tournaments/{uid}/submissions", post(submit))
        .route("/v1/tournaments/{uid}/board", get(board))
        .route("/v1/tournaments/{uid}/export", get(export))
        .route("/v1/submissions/{uid}", get(get_submission))
        .route("/v1/submissions/{uid}/status", patch(set_status))
        .with_state(state)
}

fn parse_uid(raw: &str) -> Result<Uid, ApiError> {
    raw.parse()
        .map_err(|_| ApiError::bad_request("uid", format!("`{raw}` is not a 16-hex-digit uid")))
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let text = std::str::from_utf8(body).map_err(|_| ApiError::bad_request("body", "body is not UTF-8"))?;
    serde_json::from_str(text).map_err(|e| ApiError::bad_request("body", e.to_string()))
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    let value = headers.get(header::AUTHORIZATION)?.to_str().ok()?;
    let token = value
        .strip_prefix("Bearer ")
        .or_else(|| value.strip_prefix("bearer "))?
        .trim();
    (!token.is_empty()).then_some(token)
}

fn require_admin(state: &AppState, headers: &HeaderMap) -> Result<(), ApiError> {
    if state.auth.admin_allows(bearer(headers)) {
        Ok(())
    } else if bearer(headers).is_none() {
        Err(ApiError::unauthorized("an admin bearer token is required"))
    } else {
        Err(ApiError::forbidden("token is not an admin token"))
    }
}

/// Runs a mutating service call off the async executor.
async fn blocking<T, F>(state: &AppState, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&ScoreboardService) -> Result<T, quest_core::scoreboard::ScoreboardError> + Send + 'static,
{
    let service = state.service.clone();
    tokio::task::spawn_blocking(move || f(&service))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(ApiError::from)
}

async fn healthz(State(state): State<AppState>) -> Json<serde_json::Value> {
    let snapshot = state.service.snapshot();
    Json(json!({"status": "ok", "last_seq": snapshot.last_seq}))
}

async fn create_tournament(State(state): State<AppState>, headers: HeaderMap, body: Bytes) -> ApiResult {
    require_admin(&state, &headers)?;
    let new: NewTournament = parse_body(&body)?;
    let created = blocking(&state, move |s| s.create_tournament(new)).await?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn get_tournament(State(state): State<AppState>, Path(uid): Path<String>) -> ApiResult {
    let uid = parse_uid(&uid)?;
    let snapshot = state.service.snapshot();
    Ok(Json(snapshot.tournament(&uid)?).into_response())
}

async fn open_tournament(State(state): State<AppState>, headers: HeaderMap, Path(uid): Path<String>) -> ApiResult {
    require_admin(&state, &headers)?;
    let uid = parse_uid(&uid)?;
    Ok(Json(blocking(&state, move |s| s.open_tournament(&uid)).await?).into_response())
}

async fn close_tournament(State(state): State<AppState>, headers: HeaderMap, Path(uid): Path<String>) -> ApiResult {
    require_admin(&state, &headers)?;
    let uid = parse_uid(&uid)?;
    Ok(Json(blocking(&state, move |s| s.close_tournament(&uid)).await?).into_response())
}

async fn submit(State(state): State<AppState>, headers: HeaderMap, Path(uid): Path<String>, body: Bytes) -> ApiResult {
    let token = bearer(&headers).ok_or_else(|| ApiError::unauthorized("a submitter bearer token is required"))?;
    let token_hash = hash_token(token);
    if !state.auth.submitter_allows(&token_hash) {
        return Err(ApiError::forbidden("token is not a registered submitter token"));
    }
    let uid = parse_uid(&uid)?;
    let request: SubmissionRequest = parse_body(&body)?;
    let outcome = blocking(&state, move |s| s.submit(&uid, request, &token_hash)).await?;
    let status = if outcome.created {
        StatusCode::CREATED
    } else {
        StatusCode::OK
    };
    let record = state.service.snapshot().submission(&outcome.uid)?.clone();
    Ok((
        status,
        Json(json!({"uid": outcome.uid, "created": outcome.created, "submission": record})),
    )
        .into_response())
}

async fn get_submission(State(state): State<AppState>, Path(uid): Path<String>) -> ApiResult {
    let uid = parse_uid(&uid)?;
    let snapshot = state.service.snapshot();
    Ok(Json(snapshot.submission(&uid)?).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StatusBody {
    status: ValidationStatus,
    #[serde(default)]
    note: String,
}

async fn set_status(
    State(state): State<AppState>,
    headers: HeaderMap,
    Path(uid): Path<String>,
    body: Bytes,
) -> ApiResult {
    require_admin(&state, &headers)?;
    let uid = parse_uid(&uid)?;
    let StatusBody { status, note } = parse_body(&body)?;
    Ok(Json(blocking(&state, move |s| s.set_validation_status(&uid, status, &note)).await?).into_response())
}

/// `x`, `y` and `pending` are single-valued; `label=key:value` may repeat and
/// the filters are conjunctive.
fn board_query(uid: Uid, raw: Option<&str>) -> Result<BoardQuery, ApiError> {
    let mut dim_x = None;
    let mut dim_y = None;
    let mut include_pending = true;
    let mut filters = BTreeMap::new();
    for (key, value) in form_urlencoded::parse(raw.unwrap_or("").as_bytes()) {
        match key.as_ref() {
            "x" => dim_x = Some(value.into_owned()),
            "y" => dim_y = Some(value.into_owned()),
            "pending" => {
                include_pending = match value.as_ref() {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    other => return Err(ApiError::bad_request("pending", format!("`{other}` is not a boolean"))),
                }
            }
            "label" => {
                let (k, v) = value
                    .split_once(':')
                    .filter(|(k, _)| !k.is_empty())
                    .ok_or_else(|| ApiError::bad_request("label", format!("`{value}` is not of the form key:value")))?;
                filters.insert(k.to_owned(), v.to_owned());
            }
            other => {
                return Err(ApiError::bad_request(
                    other,
                    format!("unknown query parameter `{other}`"),
                ))
            }
        }
    }
    let dim_x = dim_x.ok_or_else(|| ApiError::bad_request("x", "missing x dimension"))?;
    let dim_y = dim_y.ok_or_else(|| ApiError::bad_request("y", "missing y dimension"))?;
    Ok(BoardQuery {
        tournament_uid: uid,
        dim_x,
        dim_y,
        filters,
        include_pending,
    })
}

async fn board(State(state): State<AppState>, Path(uid): Path<String>, RawQuery(raw): RawQuery) -> ApiResult {
    let query = board_query(parse_uid(&uid)?, raw.as_deref())?;
    Ok(Json(state.service.query_scoreboard(&query)?).into_response())
}

async fn export(State(state): State<AppState>, Path(uid): Path<String>, RawQuery(raw): RawQuery) -> ApiResult {
    let uid = parse_uid(&uid)?;
    let mut format = ExportFormat::Csv;
    for (key, value) in form_urlencoded::parse(raw.unwrap_or_default().as_bytes()) {
        match key.as_ref() {
            "format" => format = value.parse()?,
            other => {
                return Err(ApiError::bad_request(
                    other,
                    format!("unknown query parameter `{other}`"),
                ))
            }
        }
    }
    let body = state.service.export(&uid, format)?;
    let content_type = match format {
        ExportFormat::Csv => "text/csv; charset=utf-8",
        ExportFormat::JsonLines => "application/x-ndjson",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], body).into_response())
}
