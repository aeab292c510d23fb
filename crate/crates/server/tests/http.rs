use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use dqs_core::synthetic::{
    generate_dataset, write_scores, write_sequences, GeneratorConfig, ReferenceScorer, ScorerConfig,
};
use dqs_core::thresholding::fit_threshold;
use dqs_core::{AnomalyScore, Label, LabelSource, LabelValue};
use dqs_server::{load_pool, router, EventLog, Service};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Fixture {
    _dir: tempfile::TempDir,
    log: std::path::PathBuf,
    seqs: std::path::PathBuf,
    scores: std::path::PathBuf,
    truth: HashMap<String, LabelValue>,
    score_of: HashMap<String, AnomalyScore>,
}

/// Thirty scored candidates written to disk, with their ground truth kept aside.
fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let data = generate_dataset(&GeneratorConfig {
        n_days: 4,
        sequences_per_day: 12,
        test_sequences: 1,
        anomaly_rate: 0.3,
        seed: 11,
        ..GeneratorConfig::default()
    })
    .unwrap();
    let (train, pool) = data.unlabelled.split_at(18);
    let scorer = ReferenceScorer::fit(&ScorerConfig {
        window: 8,
        training: train.to_vec(),
    })
    .unwrap();
    let scores = scorer.score_all(pool).unwrap();
    let seqs = dir.path().join("pool.jsonl");
    let score_path = dir.path().join("scores.jsonl");
    write_sequences(&seqs, pool).unwrap();
    write_scores(&score_path, &scores).unwrap();
    Fixture {
        log: EventLog::path_for(dir.path(), "s1"),
        truth: pool.iter().map(|s| (s.id.clone(), s.truth.unwrap())).collect(),
        score_of: scores.into_iter().map(|s| (s.sequence_id.clone(), s)).collect(),
        _dir: dir,
        seqs,
        scores: score_path,
    }
}

fn app(f: &Fixture) -> Router {
    let pool = load_pool(&f.seqs, &f.scores).unwrap();
    let svc = Service::open("s1", 7, pool, &f.log).unwrap();
    router(Arc::new(Mutex::new(svc)))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn call_raw(app: &Router, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::builder()
        .method("POST")
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn ids(v: &Value) -> Vec<String> {
    v["pending"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap().to_string())
        .collect()
}

/// Threshold fitted directly from the fixture files and the submitted labels.
fn offline_tau(f: &Fixture, labelled: &[String]) -> f64 {
    let pairs: Vec<(AnomalyScore, Label)> = labelled
        .iter()
        .map(|id| {
            (
                f.score_of[id].clone(),
                Label::new(f.truth[id], LabelSource::HumanOracle),
            )
        })
        .collect();
    fit_threshold(&pairs).unwrap().value
}

#[tokio::test]
async fn full_round_matches_offline_fit() {
    let f = fixture();
    let app = app(&f);

    let (status, s) = call(&app, "GET", "/session", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s["round"], 0);
    assert_eq!(s["pool"], 30);
    assert_eq!(s["tau"], Value::Null);

    let (status, r) = call(&app, "POST", "/session/rounds", Some(json!({"strategy": "DQS", "budget": 10}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(r["round"], 1);
    let pending = ids(&r);
    assert_eq!(pending.len(), 10);

    let (status, e) = call(&app, "POST", "/session/rounds", Some(json!({"strategy": "RQS", "budget": 2}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(e["code"], "conflict");
    assert!(e["message"].as_str().unwrap().contains("pending"));

    let (status, q) = call(&app, "GET", &format!("/queries/{}", pending[0]), None).await;
    assert_eq!(status, StatusCode::OK);
    let steps = f.score_of[&pending[0]].values.len();
    assert_eq!(q["channels"].as_array().unwrap().len(), steps);
    assert_eq!(q["score"].as_array().unwrap().len(), steps);
    assert!(q["tau_us"].is_number());

    for bad in ["/queries/nope", "/queries/%2E%2E"] {
        let (status, e) = call(&app, "GET", bad, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{bad}");
        assert_eq!(e["code"], "not_found");
    }

    let mut last = Value::Null;
    for (i, id) in pending.iter().enumerate() {
        let (status, s) = call(&app, "POST", "/labels", Some(json!({"id": id, "value": f.truth[id]}))).await;
        assert_eq!(status, StatusCode::OK);
        if i + 1 < pending.len() {
            assert_eq!(s["tau"], Value::Null);
        }
        last = s;
    }
    assert!(ids(&last).is_empty());
    assert_eq!(last["labels"], 10);
    let served = last["tau"].as_f64().unwrap();
    assert_eq!(served.to_bits(), offline_tau(&f, &pending).to_bits());

    let (status, e) = call(&app, "POST", "/labels", Some(json!({"id": pending[0], "value": "nominal"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(e["code"], "conflict");
    let (status, _) = call(&app, "GET", &format!("/queries/{}", pending[0]), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, rep) = call(&app, "GET", "/report", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(rep["labels"], 10);
    assert_eq!(rep["fitted"]["tau"].as_f64().unwrap().to_bits(), served.to_bits());
    assert_eq!(rep["fitted"]["f1"], last["f1_on_queries"]);
    assert!(rep["unsupervised"]["tau"].is_number());

    // UQS in the next round uses the fitted threshold.
    let (status, r) = call(&app, "POST", "/session/rounds", Some(json!({"strategy": "UQS", "budget": 3}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ids(&r).len(), 3);
}

#[tokio::test]
async fn malformed_requests_are_bad_requests() {
    let f = fixture();
    let app = app(&f);
    for (uri, body) in [
        ("/session/rounds", "{\"strategy\": \"XQS\", \"budget\": 2}"),
        ("/session/rounds", "{\"strategy\": \"TQS\", \"budget\": 0}"),
        ("/session/rounds", "not json"),
        ("/labels", "{\"id\": \"x\", \"value\": \"maybe\"}"),
    ] {
        let (status, e) = call_raw(&app, uri, body).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert_eq!(e["code"], "bad_request");
    }
    let (status, e) = call(&app, "POST", "/labels", Some(json!({"id": "x", "value": "nominal"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(e["code"], "not_found");
}

#[tokio::test]
async fn restart_replays_the_event_log() {
    let f = fixture();
    let first = app(&f);
    let (_, r) = call(&first, "POST", "/session/rounds", Some(json!({"strategy": "TQS", "budget": 4}))).await;
    let round1 = ids(&r);
    for id in &round1 {
        call(&first, "POST", "/labels", Some(json!({"id": id, "value": f.truth[id]}))).await;
    }
    let (_, r) = call(&first, "POST", "/session/rounds", Some(json!({"strategy": "RQS", "budget": 3}))).await;
    let round2 = ids(&r);
    call(&first, "POST", "/labels", Some(json!({"id": round2[0], "value": "anomalous"}))).await;
    let (_, before) = call(&first, "GET", "/session", None).await;
    let (_, report_before) = call(&first, "GET", "/report", None).await;
    drop(first);

    let lines = std::fs::read_to_string(&f.log).unwrap();
    let labels = lines.lines().filter(|l| l.contains("\"event\":\"label\"")).count();
    assert_eq!(labels, 5);

    let second = app(&f);
    let (_, after) = call(&second, "GET", "/session", None).await;
    let (_, report_after) = call(&second, "GET", "/report", None).await;
    assert_eq!(after, before);
    assert_eq!(report_after, report_before);
    assert_eq!(ids(&after), round2[1..].to_vec());

    // The replayed session continues where the first left off.
    let (status, _) = call(&second, "POST", "/labels", Some(json!({"id": round2[0], "value": "nominal"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    for id in &round2[1..] {
        let (status, _) = call(&second, "POST", "/labels", Some(json!({"id": id, "value": f.truth[id]}))).await;
        assert_eq!(status, StatusCode::OK);
    }
    let (_, s) = call(&second, "GET", "/session", None).await;
    let mut labelled = round1.clone();
    labelled.extend(round2.iter().cloned());
    let mut f_truth = f.truth.clone();
    f_truth.insert(round2[0].clone(), LabelValue::Anomalous);
    let f2 = Fixture { truth: f_truth, ..f };
    assert_eq!(s["tau"].as_f64().unwrap().to_bits(), offline_tau(&f2, &labelled).to_bits());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_labels_fit_once_on_the_full_set() {
    let f = fixture();
    let app = app(&f);
    let (_, r) = call(&app, "POST", "/session/rounds", Some(json!({"strategy": "RQS", "budget": 12}))).await;
    let pending = ids(&r);
    let tasks: Vec<_> = pending
        .iter()
        .map(|id| {
            let app = app.clone();
            let body = json!({"id": id, "value": f.truth[id]});
            tokio::spawn(async move { call(&app, "POST", "/labels", Some(body)).await.0 })
        })
        .collect();
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    let (_, s) = call(&app, "GET", "/session", None).await;
    assert_eq!(s["labels"], 12);
    assert_eq!(s["tau"].as_f64().unwrap().to_bits(), offline_tau(&f, &pending).to_bits());
}

#[test]
fn missing_score_is_reported() {
    let f = fixture();
    let text = std::fs::read_to_string(&f.scores).unwrap();
    let trimmed: Vec<&str> = text.lines().skip(1).collect();
    std::fs::write(&f.scores, trimmed.join("\n")).unwrap();
    let err = load_pool(&f.seqs, &f.scores).unwrap_err();
    assert!(err.to_string().contains("has no score"), "{err}");
}
