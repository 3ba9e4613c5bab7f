use std::net::TcpListener;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use atn_core::attacks::{apply_attack, AttackKind, AttackSpec};
use atn_core::classifier::{ClassifierHandle, HttpConfig};
use atn_core::labels::Task;
use atn_core::normalizer::{normalize, NormalizerConfig};
use atn_service::{router, AppState, RouterOptions, ServiceConfig, SessionStore};

fn app_with(classifiers: Vec<ClassifierHandle>, sessions: SessionStore) -> Router {
    let mut cfg = ServiceConfig::new(NormalizerConfig::default(), classifiers);
    cfg.sessions = sessions;
    router(AppState::ready(cfg), &RouterOptions::default())
}

fn app() -> Router {
    app_with(vec![ClassifierHandle::toy()], SessionStore::new(500, None).unwrap())
}

async fn call(app: &Router, method: &str, path: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(path)
        .header("content-type", "application/json")
        .body(body.into())
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn post(app: &Router, path: &str, body: Value) -> (StatusCode, Value) {
    let (status, bytes) = call(app, "POST", path, body.to_string()).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::test]
async fn normalize_matches_library() {
    let app = app();
    let text = "T.h.i.s is 𝐚 t e s t\u{200B}";
    let (status, body) = post(&app, "/normalize", json!({ "text": text })).await;
    assert_eq!(status, StatusCode::OK);
    let lib = normalize(text, &NormalizerConfig::default());
    assert_eq!(body["normalized"], lib.output);
    assert_eq!(body["edits"], serde_json::to_value(&lib.edits).unwrap());
}

#[tokio::test]
async fn normalize_with_pass_subset() {
    let app = app();
    let (status, body) = post(&app, "/normalize", json!({ "text": "a\u{200B}b 𝐚", "passes": ["zero_width"] })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["normalized"], "ab 𝐚");
    let (status, body) = post(&app, "/normalize", json!({ "text": "x", "passes": ["bogus"] })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("bogus"));
}

#[tokio::test]
async fn malformed_and_oversized_bodies() {
    let app = app();
    let (status, _) = call(&app, "POST", "/normalize", "{not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = post(&app, "/normalize", json!({ "txt": "x" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let big = json!({ "text": "a".repeat(70 * 1024) }).to_string();
    let (status, _) = call(&app, "POST", "/normalize", big).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
}

#[tokio::test]
async fn attack_is_seeded_and_echoes_params() {
    let app = app();
    let text = "The quick brown fox jumps over the lazy dog.";
    let (status, body) = post(&app, "/attack", json!({ "text": text, "kind": "insert_punctuation_chars", "seed": 9 })).await;
    assert_eq!(status, StatusCode::OK);
    let expected = apply_attack(text, &AttackSpec::sampled(AttackKind::InsertPunctuationChars, 9)).unwrap();
    assert_eq!(body["attacked"], expected);
    assert_eq!(body["seed_used"], 9);
    assert_eq!(body["params_used"], serde_json::to_value(AttackSpec::sampled(AttackKind::InsertPunctuationChars, 9).params).unwrap());

    // echoed params and seed reproduce the output
    let (_, again) = post(
        &app,
        "/attack",
        json!({ "text": text, "kind": "insert_punctuation_chars", "seed": 9, "params": body["params_used"] }),
    )
    .await;
    assert_eq!(again["attacked"], expected);

    let (status, drawn) = post(&app, "/attack", json!({ "text": text, "kind": "merge_words" })).await;
    assert_eq!(status, StatusCode::OK);
    assert!(drawn["seed_used"].is_u64());
}

#[tokio::test]
async fn attack_errors() {
    let app = app();
    let (status, body) = post(&app, "/attack", json!({ "text": "x", "kind": "rot13" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["kinds"].as_array().unwrap().len(), 9);
    let params = json!({ "aug_p": 2.0, "aug_word_p": 0.5, "aug_char_p": 0.2, "granularity": "word", "vary_fonts": false });
    let (status, _) = post(&app, "/attack", json!({ "text": "x", "kind": "merge_words", "params": params })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn score_raw_and_normalized() {
    let app = app();
    let (status, body) = post(&app, "/score", json!({ "text": "they are v.e.r.m.i.n", "normalize": true })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["classifier"], "toy_lexicon");
    assert_eq!(body["label"], "nothate");
    assert_eq!(body["normalized"]["label"], "hate");
    assert_eq!(body["normalized"]["input"]["text"], "they are vermin");

    let (status, body) = post(&app, "/score", json!({ "text": "scum" })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["label"], "hate");
    assert!(body.get("normalized").is_none());
}

#[tokio::test]
async fn score_errors() {
    let dead = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        format!("http://{}/predict", l.local_addr().unwrap())
    };
    let mut cfg = HttpConfig::new(dead, Task::Binary);
    cfg.attempts = 1;
    cfg.timeout = Duration::from_millis(500);
    let app = app_with(
        vec![ClassifierHandle::toy(), ClassifierHandle::http("remote", cfg).unwrap()],
        SessionStore::new(500, None).unwrap(),
    );
    let (status, _) = post(&app, "/score", json!({ "normalize": true })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, body) = post(&app, "/score", json!({ "text": "x", "classifier": "nope" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["classifiers"], json!(["toy_lexicon", "remote"]));
    let (status, _) = post(&app, "/score", json!({ "premise": "a", "hypothesis": "b" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = post(&app, "/score", json!({ "text": "a", "premise": "b" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = post(&app, "/score", json!({ "text": "x", "classifier": "remote" })).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
}

#[tokio::test]
async fn sessions_log_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("sessions.jsonl");
    let app = app_with(vec![ClassifierHandle::toy()], SessionStore::new(2, Some(&log)).unwrap());
    let (status, _) = call(&app, "GET", "/sessions/s1", Body::empty()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    for (i, text) in ["scum", "s.c.u.m"].iter().enumerate() {
        let (status, body) = post(
            &app,
            "/score",
            json!({ "text": text, "normalize": true, "session_id": "s1", "attack_applied": "insert_punctuation_chars" }),
        )
        .await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body["attempt"], i + 1);
    }
    let (status, _) = post(&app, "/score", json!({ "text": "x", "session_id": "s1" })).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (status, bytes) = call(&app, "GET", "/sessions/s1", Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    let exported = String::from_utf8(bytes).unwrap();
    let lines: Vec<Value> = exported.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1]["seq"], 2);
    assert_eq!(lines[1]["input"]["text"], "s.c.u.m");
    assert_eq!(lines[1]["raw_score"]["label"], "nothate");
    assert_eq!(lines[1]["normalized_score"]["label"], "hate");
    assert_eq!(std::fs::read_to_string(&log).unwrap(), exported);
}

#[tokio::test]
async fn health_reports_readiness() {
    let state = AppState::starting();
    let app = router(state.clone(), &RouterOptions::default());
    let (status, bytes) = call(&app, "GET", "/health", Body::empty()).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(serde_json::from_slice::<Value>(&bytes).unwrap()["status"], "starting");
    let (status, _) = post(&app, "/normalize", json!({ "text": "x" })).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);

    state.install(ServiceConfig::new(NormalizerConfig::default(), vec![ClassifierHandle::toy()]));
    let (status, bytes) = call(&app, "GET", "/health", Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    let body: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(body["status"], "ok");
    assert!(!body["tables_loaded"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn cors_preflight_allowed() {
    let app = app();
    let req = Request::builder()
        .method("OPTIONS")
        .uri("/normalize")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .body(Body::empty())
        .unwrap();
    let res = app.oneshot(req).await.unwrap();
    assert!(res.status().is_success());
    assert!(res.headers().contains_key("access-control-allow-origin"));
}

#[tokio::test]
async fn serves_static_playground() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>playground</p>").unwrap();
    let cfg = ServiceConfig::new(NormalizerConfig::default(), vec![ClassifierHandle::toy()]);
    let opts = RouterOptions { static_dir: Some(dir.path().to_path_buf()), ..Default::default() };
    let app = router(AppState::ready(cfg), &opts);
    let (status, bytes) = call(&app, "GET", "/index.html", Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(bytes, b"<p>playground</p>");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn small_requests_are_fast() {
    let app = Arc::new(app());
    let text = apply_attack(
        &"Those people were never honest about the plan, they said. ".repeat(16)[..900],
        &AttackSpec::sampled(AttackKind::InsertPunctuationChars, 3),
    )
    .unwrap();
    assert!(text.len() <= 1024 + 512);
    let mut latencies = Vec::new();
    for i in 0..300 {
        let (path, body) = match i % 3 {
            0 => ("/normalize", json!({ "text": text })),
            1 => ("/score", json!({ "text": text, "normalize": true })),
            _ => ("/attack", json!({ "text": &text[..text.len().min(1000)].trim_end_matches(|c: char| !c.is_ascii()), "kind": "simulate_typos", "seed": i })),
        };
        let t = Instant::now();
        let (status, _) = post(&app, path, body).await;
        latencies.push(t.elapsed());
        assert_eq!(status, StatusCode::OK);
    }
    latencies.sort();
    let p99 = latencies[latencies.len() * 99 / 100];
    eprintln!("p99 = {p99:?}");
    assert!(p99 < Duration::from_millis(50), "p99 {p99:?}");
}
