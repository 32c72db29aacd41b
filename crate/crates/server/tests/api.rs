use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use quest_core::scoreboard::ScoreboardService;
use quest_server::{router, AuthConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

struct Reply {
    status: StatusCode,
    content_type: String,
    body: Vec<u8>,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }
}

async fn call(app: &Router, method: Method, uri: &str, token: Option<&str>, body: Option<Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
    }
    let req = match body {
        Some(b) => req
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let content_type = resp
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_owned())
        .unwrap_or_default();
    let body = to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec();
    Reply {
        status,
        content_type,
        body,
    }
}

fn tournament_body() -> Value {
    json!({
        "title": "ReQuEST demo",
        "space": {"dimensions": [
            {"metric_id": "accuracy", "direction": "maximize", "unit": "ratio"},
            {"metric_id": "latency_s", "direction": "minimize", "unit": "seconds"}
        ]},
        "opens_at": "2018-01-01T00:00:00Z",
        "closes_at": "2018-03-01T00:00:00Z"
    })
}

fn submission(accuracy: f64, latency: f64, labels: &[&str]) -> Value {
    json!({
        "workflow": {"uid": "00000000000000a1", "program_ref": {"uid": "00000000000000b2"}},
        "environment": {
            "os_name": "linux", "os_version": "unknown", "kernel_version": "6.1", "hostname_hash": "0011223344556677",
            "dependency_versions": {}, "timestamp_utc": "2018-01-02T00:00:00Z",
            "platform": {"cpu": "a53", "os_family": "linux", "ram_bytes": 1024, "labels": labels}
        },
        "metrics": {"accuracy": accuracy, "latency_s": latency},
        "dispersion": {}
    })
}

async fn open_tournament(app: &Router, admin: Option<&str>) -> String {
    let created = call(app, Method::POST, "/v1/tournaments", admin, Some(tournament_body())).await;
    assert_eq!(created.status, StatusCode::CREATED);
    let uid = created.json()["uid"].as_str().unwrap().to_owned();
    let opened = call(app, Method::POST, &format!("/v1/tournaments/{uid}/open"), admin, None).await;
    assert_eq!(opened.status, StatusCode::OK);
    assert_eq!(opened.json()["status"], "open");
    uid
}

fn app() -> Router {
    router(Arc::new(ScoreboardService::in_memory()), AuthConfig::open())
}

#[tokio::test]
async fn healthz_reports_sequence() {
    let app = app();
    let reply = call(&app, Method::GET, "/v1/healthz", None, None).await;
    assert_eq!(reply.status, StatusCode::OK);
    assert_eq!(reply.json(), json!({"status": "ok", "last_seq": 0}));
}

#[tokio::test]
async fn tournament_errors_use_the_error_shape() {
    let app = app();
    let mut inverted = tournament_body();
    inverted["closes_at"] = json!("2017-01-01T00:00:00Z");
    let reply = call(&app, Method::POST, "/v1/tournaments", None, Some(inverted)).await;
    assert_eq!(reply.status, StatusCode::BAD_REQUEST);
    let body = reply.json();
    assert_eq!(body["code"], "invalid_window");
    assert_eq!(body["field"], "closes_at");
    assert!(body["message"].as_str().unwrap().contains("inverted"));

    let reply = call(&app, Method::POST, "/v1/tournaments", None, Some(json!({"title": 3}))).await;
    assert_eq!(reply.status, StatusCode::BAD_REQUEST);
    assert_eq!(reply.json()["field"], "body");

    let reply = call(&app, Method::POST, "/v1/tournaments/not-a-uid/open", None, None).await;
    assert_eq!(reply.status, StatusCode::BAD_REQUEST);
    assert_eq!(reply.json()["field"], "uid");

    let reply = call(&app, Method::POST, "/v1/tournaments/00000000000000ff/open", None, None).await;
    assert_eq!(reply.status, StatusCode::NOT_FOUND);

    let uid = open_tournament(&app, None).await;
    call(&app, Method::POST, &format!("/v1/tournaments/{uid}/close"), None, None).await;
    let reply = call(&app, Method::POST, &format!("/v1/tournaments/{uid}/open"), None, None).await;
    assert_eq!(reply.status, StatusCode::CONFLICT);
    assert_eq!(reply.json()["code"], "tournament_transition");
}

#[tokio::test]
async fn admin_token_guards_management_routes() {
    let app = router(
        Arc::new(ScoreboardService::in_memory()),
        AuthConfig::open()
            .with_admin_token("root-secret")
            .with_submitter_token("alice"),
    );
    let none = call(&app, Method::POST, "/v1/tournaments", None, Some(tournament_body())).await;
    assert_eq!(none.status, StatusCode::UNAUTHORIZED);
    let wrong = call(
        &app,
        Method::POST,
        "/v1/tournaments",
        Some("alice"),
        Some(tournament_body()),
    )
    .await;
    assert_eq!(wrong.status, StatusCode::FORBIDDEN);
    assert_eq!(wrong.json()["code"], "forbidden");

    let t = open_tournament(&app, Some("root-secret")).await;
    let url = format!("/v1/tournaments/{t}/submissions");
    let stranger = call(
        &app,
        Method::POST,
        &url,
        Some("mallory"),
        Some(submission(0.5, 0.1, &[])),
    )
    .await;
    assert_eq!(stranger.status, StatusCode::FORBIDDEN);
    let ok = call(&app, Method::POST, &url, Some("alice"), Some(submission(0.5, 0.1, &[]))).await;
    assert_eq!(ok.status, StatusCode::CREATED);
    let sub = ok.json()["uid"].as_str().unwrap().to_owned();
    let status_url = format!("/v1/submissions/{sub}/status");
    let patch = call(
        &app,
        Method::PATCH,
        &status_url,
        Some("alice"),
        Some(json!({"status": "validated"})),
    )
    .await;
    assert_eq!(patch.status, StatusCode::FORBIDDEN);
}

#[tokio::test]
async fn submission_flow() {
    let app = app();
    let t = open_tournament(&app, None).await;
    let url = format!("/v1/tournaments/{t}/submissions");

    let anonymous = call(&app, Method::POST, &url, None, Some(submission(0.5, 0.1, &[]))).await;
    assert_eq!(anonymous.status, StatusCode::UNAUTHORIZED);

    let mut body = submission(0.7, 0.2, &["android"]);
    body["nonce"] = json!("0123456789abcdef");
    let first = call(&app, Method::POST, &url, Some("alice"), Some(body.clone())).await;
    assert_eq!(first.status, StatusCode::CREATED);
    let first = first.json();
    assert_eq!(first["submission"]["validation_status"], "pending");
    assert_eq!(first["submission"]["submitter_token_hash"].as_str().unwrap().len(), 64);
    let retry = call(&app, Method::POST, &url, Some("alice"), Some(body)).await;
    assert_eq!(retry.status, StatusCode::OK);
    assert_eq!(retry.json()["uid"], first["uid"]);

    let mut wrong_metric = submission(0.7, 0.2, &[]);
    wrong_metric["metrics"] = json!({"energy_j": 3.0});
    let reply = call(&app, Method::POST, &url, Some("alice"), Some(wrong_metric)).await;
    assert_eq!(reply.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(reply.json()["field"], "metrics");

    let sub = first["uid"].as_str().unwrap();
    let status_url = format!("/v1/submissions/{sub}/status");
    let reply = call(
        &app,
        Method::PATCH,
        &status_url,
        None,
        Some(json!({"status": "rejected", "note": "no artifact"})),
    )
    .await;
    assert_eq!(reply.status, StatusCode::OK);
    assert_eq!(reply.json()["validation_status"], "rejected");
    let reply = call(
        &app,
        Method::PATCH,
        &status_url,
        None,
        Some(json!({"status": "validated"})),
    )
    .await;
    assert_eq!(reply.status, StatusCode::CONFLICT);
    assert_eq!(reply.json()["code"], "forbidden_transition");
    let reply = call(&app, Method::PATCH, &status_url, None, Some(json!({"status": "bogus"}))).await;
    assert_eq!(reply.status, StatusCode::BAD_REQUEST);

    call(&app, Method::POST, &format!("/v1/tournaments/{t}/close"), None, None).await;
    let reply = call(&app, Method::POST, &url, Some("alice"), Some(submission(0.9, 0.1, &[]))).await;
    assert_eq!(reply.status, StatusCode::CONFLICT);
    assert!(reply.json()["message"].as_str().unwrap().contains("closed"));
}

#[tokio::test]
async fn board_query_parameters() {
    let app = app();
    let t = open_tournament(&app, None).await;
    let url = format!("/v1/tournaments/{t}/submissions");
    for (acc, lat, labels) in [
        (0.70, 0.05, vec!["android"]),
        (0.75, 0.10, vec!["x86"]),
        (0.70, 0.12, vec!["android"]),
    ] {
        let reply = call(
            &app,
            Method::POST,
            &url,
            Some("alice"),
            Some(submission(acc, lat, &labels)),
        )
        .await;
        assert_eq!(reply.status, StatusCode::CREATED);
    }
    let board = format!("/v1/tournaments/{t}/board");
    let view = call(
        &app,
        Method::GET,
        &format!("{board}?x=latency_s&y=accuracy"),
        None,
        None,
    )
    .await
    .json();
    let points = view["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    assert_eq!(points.iter().filter(|p| p["on_frontier"] == true).count(), 2);
    assert_eq!(view["include_pending"], true);

    let hidden = call(
        &app,
        Method::GET,
        &format!("{board}?x=latency_s&y=accuracy&pending=false"),
        None,
        None,
    )
    .await;
    assert!(hidden.json()["points"].as_array().unwrap().is_empty());

    let filtered = call(
        &app,
        Method::GET,
        &format!("{board}?x=latency_s&y=accuracy&label=platform_label%3Aandroid"),
        None,
        None,
    )
    .await
    .json();
    assert_eq!(filtered["points"].as_array().unwrap().len(), 2);
    assert_eq!(filtered["filter"]["platform_label"], "android");

    for (query, field) in [
        ("x=latency_s&y=throughput", "dimension"),
        ("x=latency_s", "y"),
        ("x=latency_s&y=accuracy&pending=maybe", "pending"),
        ("x=latency_s&y=accuracy&label=nocolon", "label"),
    ] {
        let reply = call(&app, Method::GET, &format!("{board}?{query}"), None, None).await;
        assert_eq!(reply.status, StatusCode::BAD_REQUEST, "{query}");
        assert_eq!(reply.json()["field"], field, "{query}");
    }
}

#[tokio::test]
async fn export_formats() {
    let app = app();
    let t = open_tournament(&app, None).await;
    let url = format!("/v1/tournaments/{t}/submissions");
    call(&app, Method::POST, &url, Some("alice"), Some(submission(0.7, 0.2, &[]))).await;

    let csv = call(
        &app,
        Method::GET,
        &format!("/v1/tournaments/{t}/export?format=csv"),
        None,
        None,
    )
    .await;
    assert_eq!(csv.status, StatusCode::OK);
    assert!(csv.content_type.starts_with("text/csv"));
    let text = String::from_utf8(csv.body).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "uid,status,submitted_at,accuracy,latency_s,on_frontier"
    );
    // pending submissions never carry an export frontier flag
    assert!(text.lines().nth(1).unwrap().ends_with(",false"));

    let jsonl = call(
        &app,
        Method::GET,
        &format!("/v1/tournaments/{t}/export?format=jsonl"),
        None,
        None,
    )
    .await;
    assert_eq!(jsonl.content_type, "application/x-ndjson");
    let rows = quest_core::scoreboard::parse_export_jsonl(&jsonl.body).unwrap();
    assert_eq!(rows.len(), 1);

    let bad = call(
        &app,
        Method::GET,
        &format!("/v1/tournaments/{t}/export?format=xml"),
        None,
        None,
    )
    .await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
    assert_eq!(bad.json()["code"], "unknown_format");
}

#[tokio::test]
async fn serves_over_tcp() {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let server = tokio::spawn(quest_server::serve(
        listener,
        Arc::new(ScoreboardService::in_memory()),
        AuthConfig::open(),
    ));
    let mut stream = tokio::net::TcpStream::connect(addr).await.unwrap();
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    stream
        .write_all(b"GET /v1/healthz HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).await.unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    let body = response.split("\r\n\r\n").nth(1).unwrap();
    assert_eq!(
        serde_json::from_str::<Value>(body).unwrap(),
        json!({"status": "ok", "last_seq": 0})
    );
    server.abort();
}
