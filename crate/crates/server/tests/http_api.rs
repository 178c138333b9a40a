use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use kgexplain_core::config::AppConfig;
use kgexplain_core::gateway::{FailingBackend, GatewayError};
use kgexplain_core::relations::{extract_relations, SimilarityConfig};
use kgexplain_core::{detect_communities, synthetic, Gateway};
use kgexplain_server::{router, AppState, SessionStore};

fn state_with(gateway: Gateway, cfg: &AppConfig) -> Arc<AppState> {
    let graph = extract_relations(&synthetic::corpus().unwrap(), &SimilarityConfig::default()).unwrap().graph;
    let assignment = detect_communities(&graph);
    Arc::new(AppState::new(graph, assignment, Arc::new(gateway), cfg))
}

fn mock_state() -> Arc<AppState> {
    state_with(Gateway::mock(), &AppConfig::default())
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn create(app: &Router, start: &str, goal: &str) -> String {
    let (status, body) = call(app, Method::POST, "/sessions", Some(json!({"start": start, "goal": goal}))).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["session_id"].as_str().unwrap().to_string()
}

async fn ask(app: &Router, sid: &str, question: &str) -> (StatusCode, Value) {
    call(app, Method::POST, &format!("/sessions/{sid}/ask"), Some(json!({"question": question}))).await
}

async fn confirm(app: &Router, sid: &str, accepted: bool) -> (StatusCode, Value) {
    call(app, Method::POST, &format!("/sessions/{sid}/confirm"), Some(json!({"accepted": accepted}))).await
}

async fn phase(app: &Router, sid: &str) -> String {
    let (status, body) = call(app, Method::GET, &format!("/sessions/{sid}/path"), None).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body["phase"].as_str().unwrap().to_string()
}

fn question_about(state: &AppState) -> String {
    format!("Why is {} on my path?", state.graph.get("o01").unwrap().title)
}

#[tokio::test]
async fn health_reports_backend() {
    let app = router(mock_state());
    let (status, body) = call(&app, Method::GET, "/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["backend"], "mock");
}

#[tokio::test]
async fn full_cycle_generates_only_after_confirmation() {
    let state = mock_state();
    let app = router(state.clone());
    let sid = create(&app, "o01", "g1").await;

    let (_, path) = call(&app, Method::GET, &format!("/sessions/{sid}/path"), None).await;
    assert_eq!(path["phase"], "awaiting_question");
    assert_eq!(path["path"]["steps"][0]["id"], "o01");
    assert_eq!(path["path"]["goal"], "g1");
    assert_eq!(path["path"]["goal_title"], "Machine Learning for Engineers");

    let (status, body) = ask(&app, &sid, &question_about(&state)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["phase"], "awaiting_confirmation");
    assert_eq!(body["interpretation"]["target"], "o01");
    assert_eq!(body["interpretation"]["kind"], "why_relevant");
    assert!(body["interpretation"]["text"].as_str().unwrap().ends_with("correct?"));
    assert_eq!(state.gateway.calls_for(&sid), 0);

    let (status, body) = confirm(&app, &sid, true).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["phase"], "answered");
    let explanation = &body["explanation"];
    assert_eq!(explanation["target"], "o01");
    assert_eq!(explanation["focus_slot"], "why_selected");
    assert_eq!(explanation["contextualized"], true);
    assert_eq!(explanation["slots"].as_array().unwrap().len(), 4);
    assert!(!explanation["filled_text"].as_str().unwrap().contains("{{"));
    assert_eq!(state.gateway.calls_for(&sid), 1);

    // A new question starts another cycle.
    let (status, _) = ask(&app, &sid, &question_about(&state)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(phase(&app, &sid).await, "awaiting_confirmation");
}

#[tokio::test]
async fn rejection_and_wrong_phase_never_generate() {
    let state = mock_state();
    let app = router(state.clone());
    let sid = create(&app, "o01", "g1").await;

    let (status, body) = confirm(&app, &sid, true).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"]["code"], "wrong_phase");
    assert_eq!(body["error"]["details"]["phase"], "awaiting_question");

    ask(&app, &sid, &question_about(&state)).await;
    let (status, _) = ask(&app, &sid, &question_about(&state)).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (status, body) = confirm(&app, &sid, false).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["phase"], "awaiting_question");
    assert!(body["explanation"].is_null());
    assert_eq!(state.gateway.calls().len(), 0);
}

#[tokio::test]
async fn unresolved_question_lists_candidates() {
    let app = router(mock_state());
    let sid = create(&app, "o01", "g1").await;
    let (status, body) = ask(&app, &sid, "What is this about?").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "unresolved_target");
    let candidates = body["error"]["details"]["candidates"].as_array().unwrap();
    assert!(candidates.iter().any(|c| c == "Linear Regression Lecture Notes"));
    assert_eq!(phase(&app, &sid).await, "awaiting_question");
}

#[tokio::test]
async fn creation_errors_map_to_statuses() {
    let app = router(mock_state());
    let cases = [
        (json!({"start": "nope", "goal": "g1"}), StatusCode::NOT_FOUND, "unknown_node"),
        (json!({"start": "o01", "goal": "nope"}), StatusCode::NOT_FOUND, "unknown_node"),
        (json!({"start": "o01", "goal": "o02"}), StatusCode::UNPROCESSABLE_ENTITY, "not_a_goal"),
        (json!({"start": "", "goal": "g1"}), StatusCode::BAD_REQUEST, "invalid_request"),
        (json!({"start": "o01"}), StatusCode::BAD_REQUEST, "invalid_request"),
    ];
    for (body, status, code) in cases {
        let (got, resp) = call(&app, Method::POST, "/sessions", Some(body.clone())).await;
        assert_eq!(got, status, "{body} -> {resp}");
        assert_eq!(resp["error"]["code"], code, "{body}");
    }

    let req = Request::builder()
        .method(Method::POST)
        .uri("/sessions")
        .header("content-type", "application/json")
        .body(Body::from("{not json"))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);

    let (status, body) = call(&app, Method::GET, "/sessions/missing/path", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "session_not_found");
}

#[tokio::test]
async fn no_path_is_unprocessable() {
    let mut cfg = AppConfig::default();
    cfg.recommender.max_path_len = 1;
    let app = router(state_with(Gateway::mock(), &cfg));
    let (status, body) = call(&app, Method::POST, "/sessions", Some(json!({"start": "o01", "goal": "g2"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "no_path_found");
}

#[tokio::test]
async fn sessions_are_isolated() {
    let state = mock_state();
    let app = router(state.clone());
    let a = create(&app, "o01", "g1").await;
    let b = create(&app, "o03", "g1").await;
    assert_ne!(a, b);
    ask(&app, &a, &question_about(&state)).await;
    confirm(&app, &a, true).await;
    assert_eq!(phase(&app, &a).await, "answered");
    assert_eq!(phase(&app, &b).await, "awaiting_question");
    assert_eq!(state.gateway.calls_for(&a), 1);
    assert_eq!(state.gateway.calls_for(&b), 0);
    let (status, _) = confirm(&app, &b, true).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn idle_sessions_expire() {
    let graph = extract_relations(&synthetic::corpus().unwrap(), &SimilarityConfig::default()).unwrap().graph;
    let assignment = detect_communities(&graph);
    let mut state = AppState::new(graph, assignment, Arc::new(Gateway::mock()), &AppConfig::default());
    state.sessions = SessionStore::new(Duration::from_millis(100));
    let state = Arc::new(state);
    let app = router(state.clone());
    let sid = create(&app, "o01", "g1").await;
    assert_eq!(phase(&app, &sid).await, "awaiting_question");
    tokio::time::sleep(Duration::from_millis(250)).await;
    let (status, _) = call(&app, Method::GET, &format!("/sessions/{sid}/path"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(state.sessions.is_empty());
}

#[tokio::test]
async fn generation_failure_returns_to_awaiting_question() {
    let cases = [
        (GatewayError::Timeout(10), StatusCode::GATEWAY_TIMEOUT, "backend_timeout"),
        (GatewayError::AuthError(401), StatusCode::BAD_GATEWAY, "backend_auth"),
        (GatewayError::BackendUnavailable("down".into()), StatusCode::BAD_GATEWAY, "backend_unavailable"),
    ];
    for (error, status, code) in cases {
        let gateway = Gateway::new(Box::new(FailingBackend { error }));
        let state = state_with(gateway, &AppConfig::default());
        let app = router(state.clone());
        let sid = create(&app, "o01", "g1").await;
        ask(&app, &sid, &question_about(&state)).await;
        let (got, body) = confirm(&app, &sid, true).await;
        assert_eq!(got, status);
        assert_eq!(body["error"]["code"], code);
        assert_eq!(phase(&app, &sid).await, "awaiting_question");
        assert_eq!(state.gateway.calls_for(&sid), 1);
        let (again, _) = ask(&app, &sid, &question_about(&state)).await;
        assert_eq!(again, StatusCode::OK);
    }
}
