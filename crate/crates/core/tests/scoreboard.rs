mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use common::{at, request, tournament};
use proptest::prelude::*;
use quest_core::pareto::{compute_frontier, Dimension, Direction, MetricSpace};
use quest_core::registry::Uid;
use quest_core::scoreboard::{
    parse_export_jsonl, replay_bytes, replay_log, BoardQuery, ExportFormat, ScoreboardError, ScoreboardService,
    ServiceState, TournamentStatus, ValidationStatus,
};

fn acc_lat() -> MetricSpace {
    MetricSpace::new(vec![
        Dimension::new("accuracy", Direction::Maximize, "ratio"),
        Dimension::new("latency_s", Direction::Minimize, "seconds"),
    ])
    .unwrap()
}

fn open_service(space: MetricSpace) -> (ScoreboardService, Uid) {
    let svc = ScoreboardService::in_memory();
    let t = svc.create_tournament(tournament(space)).unwrap();
    svc.open_tournament(&t.uid).unwrap();
    (svc, t.uid)
}

fn board(t: &Uid, pending: bool) -> BoardQuery {
    BoardQuery {
        tournament_uid: t.clone(),
        dim_x: "latency_s".into(),
        dim_y: "accuracy".into(),
        filters: BTreeMap::new(),
        include_pending: pending,
    }
}

#[test]
fn tournament_lifecycle() {
    let svc = ScoreboardService::in_memory();
    let t = svc.create_tournament(tournament(MetricSpace::canonical())).unwrap();
    assert_eq!(t.status, TournamentStatus::Draft);
    assert_eq!(t.space.len(), 6);

    let mut inverted = tournament(MetricSpace::canonical());
    inverted.closes_at = inverted.opens_at;
    assert!(matches!(
        svc.create_tournament(inverted),
        Err(ScoreboardError::InvalidWindow { .. })
    ));

    assert!(matches!(
        svc.close_tournament(&t.uid),
        Err(ScoreboardError::TournamentTransition { .. })
    ));
    svc.open_tournament(&t.uid).unwrap();
    assert_eq!(svc.close_tournament(&t.uid).unwrap().status, TournamentStatus::Closed);
    assert!(matches!(
        svc.open_tournament(&t.uid),
        Err(ScoreboardError::TournamentTransition {
            status: TournamentStatus::Closed,
            ..
        })
    ));
    let json = r#"{"title":"x","space":{"dimensions":[]},"opens_at":"2018-01-01T00:00:00Z","closes_at":"2018-02-01T00:00:00Z"}"#;
    assert!(serde_json::from_str::<quest_core::scoreboard::NewTournament>(json).is_err());
}

#[test]
fn submissions_start_pending_and_respect_lifecycle() {
    let (svc, t) = open_service(acc_lat());
    let out = svc
        .submit(&t, request(&[("accuracy", 0.7), ("latency_s", 0.2)]), "tok")
        .unwrap();
    assert!(out.created);
    let state = svc.snapshot();
    assert_eq!(
        state.submission(&out.uid).unwrap().validation_status,
        ValidationStatus::Pending
    );

    let err = svc.submit(&t, request(&[("energy_j", 1.0)]), "tok").unwrap_err();
    assert!(matches!(err, ScoreboardError::MetricMismatch(_)));
    assert_eq!(err.field(), Some("metrics"));
    assert!(svc.submit(&t, request(&[("accuracy", 1.7)]), "tok").is_err());

    svc.close_tournament(&t).unwrap();
    let err = svc.submit(&t, request(&[("accuracy", 0.7)]), "tok").unwrap_err();
    assert!(err.to_string().contains("closed"), "{err}");
}

#[test]
fn nonce_makes_retries_idempotent() {
    let (svc, t) = open_service(acc_lat());
    let mut req = request(&[("accuracy", 0.7), ("latency_s", 0.2)]);
    req.nonce = Some("00000000deadbeef".into());
    let first = svc.submit(&t, req.clone(), "tok").unwrap();
    let again = svc.submit(&t, req.clone(), "tok").unwrap();
    assert_eq!(first.uid, again.uid);
    assert!(!again.created);
    assert_eq!(svc.snapshot().submissions.len(), 1);
    assert_eq!(svc.snapshot().last_seq, 3);
    // a different submitter may reuse the same nonce
    assert!(svc.submit(&t, req, "other").unwrap().created);
}

#[test]
fn status_transitions() {
    let (svc, t) = open_service(acc_lat());
    let a = svc
        .submit(&t, request(&[("accuracy", 0.7), ("latency_s", 0.2)]), "tok")
        .unwrap()
        .uid;
    let b = svc
        .submit(&t, request(&[("accuracy", 0.6), ("latency_s", 0.1)]), "tok")
        .unwrap()
        .uid;
    let rec = svc
        .set_validation_status(&a, ValidationStatus::Validated, "reproduced on HiKey")
        .unwrap();
    assert_eq!(rec.validation_status, ValidationStatus::Validated);
    assert_eq!(rec.status_history[0].note, "reproduced on HiKey");
    svc.set_validation_status(&b, ValidationStatus::Rejected, "no artifact")
        .unwrap();
    assert_eq!(
        svc.set_validation_status(&b, ValidationStatus::Validated, ""),
        Err(ScoreboardError::ForbiddenTransition {
            from: ValidationStatus::Rejected,
            to: ValidationStatus::Validated
        })
    );
    svc.set_validation_status(&a, ValidationStatus::Unreproducible, "audit")
        .unwrap();
    let unknown: Uid = "0000000000000bad".parse().unwrap();
    assert_eq!(
        svc.set_validation_status(&unknown, ValidationStatus::Validated, ""),
        Err(ScoreboardError::UnknownSubmission(unknown))
    );
    // the original submission event still says pending
    let log = String::from_utf8(svc.log_bytes().unwrap()).unwrap();
    assert!(log
        .lines()
        .any(|l| l.contains("\"submission_accepted\"") && l.contains("\"pending\"")));
}

#[test]
fn board_flags_projected_frontier() {
    let (svc, t) = open_service(acc_lat());
    let fast = svc
        .submit(&t, request(&[("accuracy", 0.70), ("latency_s", 0.05)]), "tok")
        .unwrap()
        .uid;
    let accurate = svc
        .submit(&t, request(&[("accuracy", 0.75), ("latency_s", 0.10)]), "tok")
        .unwrap()
        .uid;
    let dominated = svc
        .submit(&t, request(&[("accuracy", 0.70), ("latency_s", 0.12)]), "tok")
        .unwrap()
        .uid;

    let view = svc.query_scoreboard(&board(&t, true)).unwrap();
    assert_eq!(view.points.len(), 3);
    let flagged: Vec<_> = view
        .points
        .iter()
        .filter(|p| p.on_frontier)
        .map(|p| p.uid.clone())
        .collect();
    assert_eq!(flagged.len(), 2);
    assert!(flagged.contains(&fast) && flagged.contains(&accurate));
    assert_eq!(view.points[2].uid, dominated);
    for p in &view.points {
        assert_eq!(p.on_frontier, p.distance == 0.0);
    }

    // pending points are hidden unless asked for
    assert!(svc.query_scoreboard(&board(&t, false)).unwrap().points.is_empty());
    svc.set_validation_status(&dominated, ValidationStatus::Validated, "")
        .unwrap();
    let validated_only = svc.query_scoreboard(&board(&t, false)).unwrap();
    assert_eq!(validated_only.points.len(), 1);
    assert!(validated_only.points[0].on_frontier);
}

#[test]
fn board_filters_and_errors() {
    let (svc, t) = open_service(acc_lat());
    assert!(svc.query_scoreboard(&board(&t, true)).unwrap().points.is_empty());

    let mut phone = request(&[("accuracy", 0.7), ("latency_s", 0.2)]);
    phone.environment = common::environment(&["android", "hikey960"]);
    phone.labels.insert("model".into(), "squeezenet".into());
    let phone = svc.submit(&t, phone, "tok").unwrap().uid;
    let mut server = request(&[("accuracy", 0.8), ("latency_s", 0.1)]);
    server.environment = common::environment(&["x86"]);
    svc.submit(&t, server, "tok").unwrap();

    let mut q = board(&t, true);
    q.filters.insert("platform_label".into(), "android".into());
    let view = svc.query_scoreboard(&q).unwrap();
    assert_eq!(
        view.points.iter().map(|p| p.uid.clone()).collect::<Vec<_>>(),
        vec![phone.clone()]
    );
    // alone in the filtered view, it is on the frontier
    assert!(view.points[0].on_frontier);
    q.filters.insert("model".into(), "resnet".into());
    assert!(svc.query_scoreboard(&q).unwrap().points.is_empty());

    let mut bad = board(&t, true);
    bad.dim_x = "throughput".into();
    assert_eq!(
        svc.query_scoreboard(&bad),
        Err(ScoreboardError::UnknownDimension("throughput".into()))
    );
    bad.tournament_uid = "00000000000000ff".parse().unwrap();
    assert!(matches!(
        svc.query_scoreboard(&bad),
        Err(ScoreboardError::UnknownTournament(_))
    ));
}

#[test]
fn export_csv_and_jsonl() {
    let (svc, t) = open_service(MetricSpace::canonical());
    let a = svc
        .submit(
            &t,
            request(&[
                ("accuracy", 0.7),
                ("latency_s", 0.2),
                ("energy_j", 1.0),
                ("peak_mem_bytes", 1e6),
                ("model_bytes", 5e6),
                ("cost_usd", 120.0),
            ]),
            "tok",
        )
        .unwrap()
        .uid;
    svc.submit(&t, request(&[("accuracy", 0.6), ("latency_s", 0.3)]), "tok")
        .unwrap();
    svc.set_validation_status(&a, ValidationStatus::Validated, "").unwrap();

    let csv = String::from_utf8(svc.export(&t, ExportFormat::Csv).unwrap()).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines[0],
        "uid,status,submitted_at,accuracy,latency_s,energy_j,peak_mem_bytes,model_bytes,cost_usd,on_frontier"
    );
    let row_a = lines.iter().find(|l| l.starts_with(&format!("{a},"))).unwrap();
    let row_b = lines.iter().skip(1).find(|l| !l.starts_with(&format!("{a},"))).unwrap();
    assert!(row_a.starts_with(&format!("{a},validated,")));
    assert!(row_a.ends_with(",true"));
    assert!(row_b.ends_with(",,,,,false"));
    assert_eq!(svc.export(&t, ExportFormat::Csv).unwrap(), csv.as_bytes());

    let jsonl = svc.export(&t, ExportFormat::JsonLines).unwrap();
    let rows = parse_export_jsonl(&jsonl).unwrap();
    let state = svc.snapshot();
    for row in rows {
        assert_eq!(row.metrics, state.submission(&row.uid).unwrap().metrics);
    }
    assert!("xml".parse::<ExportFormat>().is_err());
}

#[test]
fn file_log_replays_to_identical_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.jsonl");
    let svc = ScoreboardService::open(&path).unwrap();
    let t = svc.create_tournament(tournament(acc_lat())).unwrap().uid;
    svc.open_tournament(&t).unwrap();
    let s = svc
        .submit(&t, request(&[("accuracy", 0.7), ("latency_s", 0.2)]), "tok")
        .unwrap()
        .uid;
    svc.set_validation_status(&s, ValidationStatus::Validated, "ok")
        .unwrap();

    let replayed = replay_log(&path).unwrap();
    assert_eq!(replayed.canonical_json(), svc.snapshot().canonical_json());

    // reopening continues the same sequence
    drop(svc);
    let svc = ScoreboardService::open(&path).unwrap();
    svc.close_tournament(&t).unwrap();
    assert_eq!(replay_log(&path).unwrap().last_seq, 5);

    let text = std::fs::read_to_string(&path).unwrap();
    for (i, line) in text.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["seq"], i as u64 + 1);
        assert!(v.get("kind").is_some() && v.get("payload").is_some() && v.get("recorded_at").is_some());
    }
}

#[test]
fn empty_and_corrupt_logs() {
    assert_eq!(replay_bytes(b"").unwrap(), ServiceState::default());

    let (svc, t) = open_service(acc_lat());
    svc.submit(&t, request(&[("accuracy", 0.7), ("latency_s", 0.2)]), "tok")
        .unwrap();
    let bytes = svc.log_bytes().unwrap();
    let second_line = bytes.iter().position(|&b| b == b'\n').unwrap() + 1;
    let cut = &bytes[..bytes.len() - 10];
    let third_line = second_line + bytes[second_line..].iter().position(|&b| b == b'\n').unwrap() + 1;
    match replay_bytes(cut) {
        Err(ScoreboardError::LogCorrupt { offset, .. }) => assert_eq!(offset, third_line),
        other => panic!("expected corruption, got {other:?}"),
    }
    let mut garbled = bytes.clone();
    garbled[second_line] = b'#';
    assert!(matches!(
        replay_bytes(&garbled),
        Err(ScoreboardError::LogCorrupt { offset, .. }) if offset == second_line
    ));
}

#[test]
fn fifty_concurrent_submissions() {
    let (svc, t) = open_service(acc_lat());
    let svc = Arc::new(svc);
    let handles: Vec<_> = (0..50)
        .map(|i| {
            let svc = svc.clone();
            let t = t.clone();
            std::thread::spawn(move || {
                let acc = 0.5 + (i as f64 * 0.37).sin().abs() * 0.4;
                let lat = 0.05 + (i as f64 * 0.91).cos().abs();
                svc.submit(&t, request(&[("accuracy", acc), ("latency_s", lat)]), "tok")
                    .unwrap()
                    .uid
            })
        })
        .collect();
    let uids: Vec<Uid> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    let state = svc.snapshot();
    assert_eq!(state.submissions.len(), 50);
    assert!(uids.iter().all(|u| state.submissions.contains_key(u)));
    let replayed = replay_bytes(&svc.log_bytes().unwrap()).unwrap();
    assert_eq!(replayed.submissions.len(), 50);
    let batch = state.batch_frontier(&t, ValidationStatus::is_live);
    assert_eq!(state.frontiers[&t].live, batch);
}

#[derive(Debug, Clone)]
enum Op {
    Submit(f64, f64),
    Status(usize, usize),
}

fn ops() -> impl Strategy<Value = Vec<Op>> {
    prop::collection::vec(
        prop_oneof![
            3 => ((0u8..8), (0u8..8)).prop_map(|(a, l)| Op::Submit(f64::from(a) / 8.0, f64::from(l) / 4.0 + 0.01)),
            1 => (any::<usize>(), 0usize..3).prop_map(|(i, s)| Op::Status(i, s)),
        ],
        1..40,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frontier_cache_stays_coherent(ops in ops()) {
        let (svc, t) = open_service(acc_lat());
        let mut uids = Vec::new();
        for op in ops {
            match op {
                Op::Submit(a, l) => uids.push(svc.submit(&t, request(&[("accuracy", a), ("latency_s", l)]), "tok").unwrap().uid),
                Op::Status(i, s) if !uids.is_empty() => {
                    let target = [ValidationStatus::Validated, ValidationStatus::Rejected, ValidationStatus::Unreproducible][s];
                    let _ = svc.set_validation_status(&uids[i % uids.len()], target, "");
                }
                Op::Status(..) => {}
            }
            let state = svc.snapshot();
            let live = state.batch_frontier(&t, ValidationStatus::is_live);
            let validated = state.batch_frontier(&t, |s| s == ValidationStatus::Validated);
            prop_assert_eq!(&state.frontiers[&t].live, &live);
            prop_assert_eq!(&state.frontiers[&t].validated, &validated);
            let points: Vec<_> = state.submissions.values()
                .filter(|s| s.validation_status.is_live())
                .map(|s| (s.uid.to_string(), s.metrics.clone()))
                .collect();
            prop_assert_eq!(live, compute_frontier(&points, &acc_lat()).unwrap());
        }
        let replayed = replay_bytes(&svc.log_bytes().unwrap()).unwrap();
        prop_assert_eq!(replayed.canonical_json(), svc.snapshot().canonical_json());
    }
}

#[test]
fn server_clock_stamps_submissions() {
    let svc = ScoreboardService::in_memory().with_clock(|| at(42));
    let t = svc.create_tournament(tournament(acc_lat())).unwrap().uid;
    svc.open_tournament(&t).unwrap();
    let s = svc.submit(&t, request(&[("accuracy", 0.5)]), "tok").unwrap().uid;
    assert_eq!(svc.snapshot().submission(&s).unwrap().submitted_at, at(42));
}
