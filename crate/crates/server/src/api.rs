//! HTTP routes of the dialogue service.
//!
//! | method | route                    | body             |
//! |--------|--------------------------|------------------|
//! | POST   | `/sessions`              | `{start, goal}`  |
//! | POST   | `/sessions/{id}/ask`     | `{question}`     |
//! | POST   | `/sessions/{id}/confirm` | `{accepted}`     |
//! | GET    | `/sessions/{id}/path`    |                  |
//! | GET    | `/health`                |                  |
//!
//! Errors are `{"error": {"code", "message", "details"}}`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use kgexplain_core::config::AppConfig;
use kgexplain_core::gateway::GatewayError;
use kgexplain_core::kg::{KnowledgeGraph, NodeId, TaxonomyLevel};
use kgexplain_core::pipeline::{ExplainError, ExplainSettings, Explainer};
use kgexplain_core::prompt::SlotValue;
use kgexplain_core::recommend::{recommend_path, LearningPath, RecommendError, RecommenderConfig};
use kgexplain_core::{CommunityAssignment, Gateway};

use crate::session::{Confirmation, Interpretation, Phase, Session, SessionError};

type Shared<T> = Arc<tokio::sync::Mutex<T>>;

struct Entry {
    session: Shared<Session>,
    last_access: Instant,
}

/// Sessions keyed by id. Idle sessions are evicted on every access.
pub struct SessionStore {
    ttl: Duration,
    entries: Mutex<HashMap<String, Entry>>,
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        SessionStore {
            ttl,
            entries: Mutex::new(HashMap::new()),
        }
    }

    fn locked(&self) -> std::sync::MutexGuard<'_, HashMap<String, Entry>> {
        let mut map = self.entries.lock().expect("session map lock");
        let now = Instant::now();
        map.retain(|_, e| now.duration_since(e.last_access) <= self.ttl);
        map
    }

    pub fn insert(&self, session: Session) -> Shared<Session> {
        let id = session.id.clone();
        let shared = Arc::new(tokio::sync::Mutex::new(session));
        self.locked().insert(
            id,
            Entry {
                session: shared.clone(),
                last_access: Instant::now(),
            },
        );
        shared
    }

    /// Refreshes the idle timer of the returned session.
    pub fn get(&self, id: &str) -> Option<Shared<Session>> {
        let mut map = self.locked();
        let entry = map.get_mut(id)?;
        entry.last_access = Instant::now();
        Some(entry.session.clone())
    }

    pub fn len(&self) -> usize {
        self.locked().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub struct AppState {
    pub graph: KnowledgeGraph,
    pub assignment: CommunityAssignment,
    pub settings: ExplainSettings,
    pub recommender: RecommenderConfig,
    pub gateway: Arc<Gateway>,
    pub sessions: SessionStore,
}

impl AppState {
    pub fn new(graph: KnowledgeGraph, assignment: CommunityAssignment, gateway: Arc<Gateway>, cfg: &AppConfig) -> Self {
        AppState {
            graph,
            assignment,
            settings: cfg.explain_settings(),
            recommender: cfg.recommender,
            gateway,
            sessions: SessionStore::new(Duration::from_secs(cfg.service.session_ttl_secs)),
        }
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    details: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            details: Value::Null,
        }
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    fn session_not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "session_not_found", format!("no session {id}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message, "details": self.details}});
        (self.status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rej: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", rej.body_text())
    }
}

impl From<RecommendError> for ApiError {
    fn from(err: RecommendError) -> Self {
        let message = err.to_string();
        match err {
            RecommendError::UnknownNode(id) => {
                ApiError::new(StatusCode::NOT_FOUND, "unknown_node", message).with_details(json!({"id": id}))
            }
            RecommendError::NotAGoal(id) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "not_a_goal", message).with_details(json!({"id": id}))
            }
            RecommendError::NoPathFound { max_len, .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "no_path_found", message)
                    .with_details(json!({"max_path_len": max_len}))
            }
            RecommendError::InvalidPath(_) | RecommendError::InvalidConfig(_) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
            }
        }
    }
}

fn gateway_error(err: &GatewayError) -> ApiError {
    let (status, code) = match err {
        GatewayError::Timeout(_) => (StatusCode::GATEWAY_TIMEOUT, "backend_timeout"),
        GatewayError::AuthError(_) => (StatusCode::BAD_GATEWAY, "backend_auth"),
        GatewayError::BackendUnavailable(_) => (StatusCode::BAD_GATEWAY, "backend_unavailable"),
        GatewayError::ProtocolError(_) => (StatusCode::BAD_GATEWAY, "backend_protocol"),
        GatewayError::MalformedPrompt(_) | GatewayError::InvalidRequest(_) => {
            (StatusCode::INTERNAL_SERVER_ERROR, "internal")
        }
    };
    ApiError::new(status, code, err.to_string())
}

impl From<SessionError> for ApiError {
    fn from(err: SessionError) -> Self {
        let message = err.to_string();
        match err {
            SessionError::WrongPhase { actual } => {
                ApiError::new(StatusCode::CONFLICT, "wrong_phase", message).with_details(json!({"phase": actual}))
            }
            SessionError::UnresolvedTarget { candidates } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unresolved_target", message)
                    .with_details(json!({"candidates": candidates}))
            }
            SessionError::EmptyQuestion => ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", message),
            SessionError::Generation(ExplainError::Gateway(g)) => gateway_error(&g),
            SessionError::Generation(ExplainError::Prompt(p)) => {
                ApiError::new(StatusCode::BAD_GATEWAY, "malformed_response", p.to_string())
            }
            SessionError::Generation(other) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", other.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PathStep {
    pub id: NodeId,
    pub title: String,
    pub level: TaxonomyLevel,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PathView {
    pub steps: Vec<PathStep>,
    pub goal: NodeId,
    pub goal_title: String,
    pub step_scores: Vec<f64>,
    pub score: f64,
}

fn path_view(graph: &KnowledgeGraph, path: &LearningPath) -> PathView {
    let title = |id: &NodeId| graph.node(id).map(|n| n.title.clone()).unwrap_or_default();
    PathView {
        steps: path
            .steps
            .iter()
            .filter_map(|id| graph.node(id).ok())
            .map(|n| PathStep {
                id: n.id.clone(),
                title: n.title.clone(),
                level: n.level,
            })
            .collect(),
        goal: path.goal.clone(),
        goal_title: title(&path.goal),
        step_scores: path.step_scores.clone(),
        score: path.score,
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub start: String,
    pub goal: String,
}

#[derive(Debug, Deserialize)]
pub struct Ask {
    pub question: String,
}

#[derive(Debug, Deserialize)]
pub struct Confirm {
    pub accepted: bool,
}

#[derive(Debug, Serialize)]
struct SessionView {
    session_id: String,
    phase: Phase,
    path: PathView,
}

#[derive(Debug, Serialize)]
struct AskView<'a> {
    session_id: &'a str,
    phase: Phase,
    interpretation: &'a Interpretation,
}

#[derive(Debug, Serialize)]
struct ExplanationView {
    target: NodeId,
    target_title: String,
    focus_slot: Option<String>,
    filled_text: String,
    slots: Vec<SlotValue>,
    contextualized: bool,
}

#[derive(Debug, Serialize)]
struct ConfirmView {
    session_id: String,
    phase: Phase,
    explanation: Option<ExplanationView>,
}

fn node_id(raw: &str, field: &str) -> Result<NodeId, ApiError> {
    NodeId::new(raw).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", format!("{field}: {e}")))
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Value> {
    Json(json!({
        "status": "ok",
        "backend": state.gateway.backend_id(),
        "sessions": state.sessions.len(),
    }))
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let Json(req) = body?;
    let start = node_id(&req.start, "start")?;
    let goal = node_id(&req.goal, "goal")?;
    let path = recommend_path(&state.graph, &start, &goal, &state.recommender)?;
    let id = uuid::Uuid::new_v4().to_string();
    let view = SessionView {
        session_id: id.clone(),
        phase: Phase::AwaitingQuestion,
        path: path_view(&state.graph, &path),
    };
    state.sessions.insert(Session::new(id.clone(), path));
    tracing::info!(session = %id, "session created");
    Ok((StatusCode::CREATED, Json(serde_json::to_value(view).expect("view serializes"))))
}

async fn get_path(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let shared = state.sessions.get(&id).ok_or_else(|| ApiError::session_not_found(&id))?;
    let session = shared.lock().await;
    let view = SessionView {
        session_id: id,
        phase: session.phase(),
        path: path_view(&state.graph, &session.path),
    };
    Ok(Json(serde_json::to_value(view).expect("view serializes")))
}

async fn ask(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<Ask>, JsonRejection>,
) -> Result<Json<Value>, ApiError> {
    let Json(req) = body?;
    let shared = state.sessions.get(&id).ok_or_else(|| ApiError::session_not_found(&id))?;
    let mut session = shared.lock().await;
    let interpretation = session.ask(&state.graph, &req.question)?.clone();
    let view = AskView {
        session_id: &id,
        phase: session.phase(),
        interpretation: &interpretation,
    };
    Ok(Json(serde_json::to_value(view).expect("view serializes")))
}

async fn confirm(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<Confirm>, JsonRejection>,
) -> Result<Json<Value>, ApiError> {
    let Json(req) = body?;
    let shared = state.sessions.get(&id).ok_or_else(|| ApiError::session_not_found(&id))?;
    let mut session = shared.lock_owned().await;
    let worker_state = state.clone();
    // Generation blocks on the backend; the session stays locked throughout
    // so concurrent requests on it wait instead of racing the transition.
    let (session, outcome) = tokio::task::spawn_blocking(move || {
        let state = worker_state;
        let goal_title = state.graph.node(&session.path.goal).map(|n| n.title.clone());
        let trace_id = session.id.clone();
        let outcome = session.confirm(req.accepted, |interp| {
            let explainer = Explainer {
                graph: &state.graph,
                assignment: &state.assignment,
                settings: &state.settings,
                gateway: &state.gateway,
            };
            let goal_title = goal_title.clone()?;
            Ok(explainer.explain(&interp.target, &goal_title, true, Some(&trace_id))?.explanation)
        });
        (session, outcome)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;

    let explanation = match outcome {
        Ok(Confirmation::Rejected) => None,
        Ok(Confirmation::Answered { interpretation, explanation }) => {
            let focus = interpretation.kind.focus_slot();
            Some(ExplanationView {
                target: interpretation.target,
                target_title: interpretation.target_title,
                focus_slot: explanation.slot(focus).map(|_| focus.to_string()),
                filled_text: explanation.filled_text,
                slots: explanation.slot_values,
                contextualized: explanation.contextualized,
            })
        }
        Err(e) => {
            tracing::warn!(session = %id, error = %e, "confirmation failed");
            return Err(e.into());
        }
    };
    let view = ConfirmView {
        session_id: id,
        phase: session.phase(),
        explanation,
    };
    Ok(Json(serde_json::to_value(view).expect("view serializes")))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/ask", post(ask))
        .route("/sessions/{id}/confirm", post(confirm))
        .route("/sessions/{id}/path", get(get_path))
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}
