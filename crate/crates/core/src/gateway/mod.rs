//! Text-generation backends.
//!
//! [`Gateway`] wraps a [`TextBackend`] and keeps an audit log of every
//! generation call. The log records who asked (`trace_id`) and a hash of the
//! prompt, never prompt text or credentials.

mod mock;
mod remote;

use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mock::{MockBackend, FILLER_PHRASES};
pub use remote::{RemoteBackend, RemoteConfig};

use crate::text::fnv1a64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GatewayError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("authentication rejected by backend (status {0})")]
    AuthError(u16),
    #[error("protocol error: {0}")]
    ProtocolError(String),
    #[error("request timed out after {0} ms")]
    Timeout(u64),
    #[error("malformed prompt: {0}")]
    MalformedPrompt(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRequest {
    /// Role, definitions and context.
    pub system_text: String,
    /// Task body.
    pub user_text: String,
    pub max_words: usize,
    pub backend_id: String,
    /// Caller-supplied tag (e.g. a session id) recorded in the audit log.
    #[serde(default)]
    pub trace_id: Option<String>,
}

impl GenerationRequest {
    pub fn prompt_hash(&self) -> u64 {
        let mut bytes = Vec::with_capacity(self.system_text.len() + self.user_text.len() + 1);
        bytes.extend_from_slice(self.system_text.as_bytes());
        bytes.push(0x1f);
        bytes.extend_from_slice(self.user_text.as_bytes());
        fnv1a64(&bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub text: String,
    pub backend_id: String,
    pub latency_ms: u64,
}

pub trait TextBackend: Send + Sync {
    fn id(&self) -> &str;
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult, GatewayError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    pub trace_id: Option<String>,
    pub backend_id: String,
    pub prompt_hash: u64,
    pub ok: bool,
}

pub struct Gateway {
    backend: Box<dyn TextBackend>,
    log: Mutex<Vec<CallRecord>>,
}

impl Gateway {
    pub fn new(backend: Box<dyn TextBackend>) -> Self {
        Gateway {
            backend,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn mock() -> Self {
        Gateway::new(Box::new(MockBackend::new()))
    }

    pub fn backend_id(&self) -> &str {
        self.backend.id()
    }

    pub fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult, GatewayError> {
        let started = Instant::now();
        let result = self.backend.generate(request);
        let record = CallRecord {
            trace_id: request.trace_id.clone(),
            backend_id: self.backend.id().to_string(),
            prompt_hash: request.prompt_hash(),
            ok: result.is_ok(),
        };
        tracing::debug!(
            backend = %record.backend_id,
            trace = record.trace_id.as_deref().unwrap_or("-"),
            prompt_hash = format_args!("{:016x}", record.prompt_hash),
            ok = record.ok,
            elapsed_ms = started.elapsed().as_millis() as u64,
            "generation call"
        );
        self.log.lock().expect("log lock").push(record);
        result
    }

    /// Snapshot of the audit log in call order.
    pub fn calls(&self) -> Vec<CallRecord> {
        self.log.lock().expect("log lock").clone()
    }

    pub fn calls_for(&self, trace_id: &str) -> usize {
        self.log
            .lock()
            .expect("log lock")
            .iter()
            .filter(|c| c.trace_id.as_deref() == Some(trace_id))
            .count()
    }
}

/// Backend that always fails; used to exercise degraded paths.
pub struct FailingBackend {
    pub error: GatewayError,
}

impl TextBackend for FailingBackend {
    fn id(&self) -> &str {
        "failing"
    }

    fn generate(&self, _request: &GenerationRequest) -> Result<GenerationResult, GatewayError> {
        Err(self.error.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(trace: Option<&str>) -> GenerationRequest {
        GenerationRequest {
            system_text: "ROLE\nteacher\n".into(),
            user_text: "TASK why_selected (max 10 words): Explain.\n".into(),
            max_words: 10,
            backend_id: "mock".into(),
            trace_id: trace.map(str::to_string),
        }
    }

    #[test]
    fn gateway_logs_every_call() {
        let gw = Gateway::mock();
        gw.generate(&request(Some("s1"))).unwrap();
        gw.generate(&request(None)).unwrap();
        assert_eq!(gw.calls().len(), 2);
        assert_eq!(gw.calls_for("s1"), 1);
        assert_eq!(gw.calls_for("s2"), 0);
        assert!(gw.calls().iter().all(|c| c.ok));
    }

    #[test]
    fn failures_are_logged_too() {
        let gw = Gateway::new(Box::new(FailingBackend {
            error: GatewayError::BackendUnavailable("down".into()),
        }));
        assert!(gw.generate(&request(Some("x"))).is_err());
        assert_eq!(gw.calls(), [CallRecord {
            trace_id: Some("x".into()),
            backend_id: "failing".into(),
            prompt_hash: request(None).prompt_hash(),
            ok: false
        }]);
    }
}
