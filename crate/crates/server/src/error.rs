use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use quest_core::scoreboard::ScoreboardError;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            field: None,
        }
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }

    pub fn bad_request(field: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_request", message).with_field(field)
    }

    pub fn unauthorized(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", message)
    }

    pub fn forbidden(message: impl Into<String>) -> Self {
        Self::new(StatusCode::FORBIDDEN, "forbidden", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<ScoreboardError> for ApiError {
    fn from(err: ScoreboardError) -> Self {
        use ScoreboardError::*;
        let (status, code) = match &err {
            UnknownTournament(_) => (StatusCode::NOT_FOUND, "unknown_tournament"),
            UnknownSubmission(_) => (StatusCode::NOT_FOUND, "unknown_submission"),
            UnknownDimension(_) => (StatusCode::BAD_REQUEST, "unknown_dimension"),
            InvalidWindow { .. } => (StatusCode::BAD_REQUEST, "invalid_window"),
            MetricMismatch(_) => (StatusCode::UNPROCESSABLE_ENTITY, "metric_mismatch"),
            Malformed { .. } => (StatusCode::BAD_REQUEST, "invalid_request"),
            UnknownFormat(_) => (StatusCode::BAD_REQUEST, "unknown_format"),
            TournamentTransition { .. } => (StatusCode::CONFLICT, "tournament_transition"),
            TournamentNotOpen { .. } => (StatusCode::CONFLICT, "tournament_not_open"),
            ForbiddenTransition { .. } => (StatusCode::CONFLICT, "forbidden_transition"),
            DuplicateUid(_) => (StatusCode::CONFLICT, "duplicate_uid"),
            Log(_) | LogCorrupt { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "log_failure"),
        };
        ApiError {
            status,
            code,
            message: err.to_string(),
            field: err.field().map(str::to_owned),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}
