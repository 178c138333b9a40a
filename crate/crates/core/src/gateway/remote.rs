//! Client for hosted chat-completion services.
//!
//! Wire format: `POST {base_url}/chat/completions` with
//! `{"model", "messages": [{"role": "system"|"user", "content"}], "max_tokens"}`
//! and a bearer token; the reply is read from `choices[0].message.content`.

use std::fmt;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{GatewayError, GenerationRequest, GenerationResult, TextBackend};

/// Coarse words-to-tokens factor used to size `max_tokens`.
pub const TOKENS_PER_WORD: usize = 2;

#[derive(Clone)]
pub struct RemoteConfig {
    pub base_url: String,
    pub model_name: String,
    pub api_key: String,
    pub timeout_ms: u64,
    pub retries: u32,
    pub backoff_ms: u64,
    pub max_concurrent: usize,
}

impl fmt::Debug for RemoteConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemoteConfig")
            .field("base_url", &self.base_url)
            .field("model_name", &self.model_name)
            .field("api_key", &"<redacted>")
            .field("timeout_ms", &self.timeout_ms)
            .field("retries", &self.retries)
            .field("backoff_ms", &self.backoff_ms)
            .field("max_concurrent", &self.max_concurrent)
            .finish()
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    max_tokens: usize,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ReplyMessage,
}

#[derive(Deserialize)]
struct ReplyMessage {
    content: Option<String>,
}

/// Counting semaphore capping in-flight requests.
struct Permits {
    available: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a Permits);

impl Permits {
    fn new(n: usize) -> Self {
        Permits {
            available: Mutex::new(n.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut n = self.available.lock().expect("permit lock");
        while *n == 0 {
            n = self.freed.wait(n).expect("permit lock");
        }
        *n -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.available.lock().expect("permit lock") += 1;
        self.0.freed.notify_one();
    }
}

pub struct RemoteBackend {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
    permits: Permits,
}

enum Attempt {
    Retry(GatewayError),
    Fail(GatewayError),
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| GatewayError::BackendUnavailable(e.to_string()))?;
        let permits = Permits::new(config.max_concurrent);
        Ok(RemoteBackend {
            config,
            client,
            permits,
        })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    /// Strips the credential from any text that may end up in logs or errors.
    fn redact(&self, text: &str) -> String {
        if self.config.api_key.is_empty() {
            text.to_string()
        } else {
            text.replace(&self.config.api_key, "<redacted>")
        }
    }

    fn attempt(&self, body: &ChatRequest<'_>) -> Result<String, Attempt> {
        let response = self
            .client
            .post(self.endpoint())
            .bearer_auth(&self.config.api_key)
            .json(body)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    Attempt::Retry(GatewayError::Timeout(self.config.timeout_ms))
                } else {
                    Attempt::Retry(GatewayError::BackendUnavailable(self.redact(&e.to_string())))
                }
            })?;
        let status = response.status().as_u16();
        let text = response.text().map_err(|e| {
            if e.is_timeout() {
                Attempt::Retry(GatewayError::Timeout(self.config.timeout_ms))
            } else {
                Attempt::Retry(GatewayError::BackendUnavailable(self.redact(&e.to_string())))
            }
        })?;
        match status {
            200..=299 => {}
            401 | 403 => return Err(Attempt::Fail(GatewayError::AuthError(status))),
            408 | 429 | 500..=599 => {
                return Err(Attempt::Retry(GatewayError::BackendUnavailable(format!(
                    "status {status}"
                ))))
            }
            _ => {
                let snippet: String = self.redact(&text).chars().take(200).collect();
                return Err(Attempt::Fail(GatewayError::ProtocolError(format!(
                    "status {status}: {snippet}"
                ))));
            }
        }
        let parsed: ChatResponse = serde_json::from_str(&text)
            .map_err(|e| Attempt::Fail(GatewayError::ProtocolError(format!("bad response body: {e}"))))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .filter(|c| !c.trim().is_empty())
            .ok_or_else(|| Attempt::Fail(GatewayError::ProtocolError("response has no content".into())))
    }
}

impl TextBackend for RemoteBackend {
    fn id(&self) -> &str {
        &self.config.model_name
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult, GatewayError> {
        let body = ChatRequest {
            model: &self.config.model_name,
            messages: vec![
                ChatMessage {
                    role: "system",
                    content: &request.system_text,
                },
                ChatMessage {
                    role: "user",
                    content: &request.user_text,
                },
            ],
            max_tokens: request.max_words * TOKENS_PER_WORD,
        };
        let _permit = self.permits.acquire();
        let started = Instant::now();
        let mut attempt = 0;
        loop {
            match self.attempt(&body) {
                Ok(text) => {
                    return Ok(GenerationResult {
                        text,
                        backend_id: self.config.model_name.clone(),
                        latency_ms: started.elapsed().as_millis() as u64,
                    })
                }
                Err(Attempt::Fail(err)) => return Err(err),
                Err(Attempt::Retry(err)) => {
                    if attempt >= self.config.retries {
                        return Err(err);
                    }
                    tracing::warn!(attempt, error = %err, "retrying generation request");
                    std::thread::sleep(Duration::from_millis(self.config.backoff_ms << attempt.min(10)));
                    attempt += 1;
                }
            }
        }
    }
}
