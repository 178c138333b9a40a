//! TOML configuration shared by the CLI and the service.
//!
//! Every section and key is optional; missing keys take their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::ContextLimits;
use crate::eval::EvalConfig;
use crate::gateway::{Gateway, GatewayError, MockBackend, RemoteBackend, RemoteConfig};
use crate::pipeline::ExplainSettings;
use crate::prompt::{default_definitions, DefinitionEntry, ExplanationTemplate, RoleSpec};
use crate::recommend::RecommenderConfig;
use crate::relations::SimilarityConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config value: {0}")]
    Invalid(String),
    #[error("environment variable {0} with the backend API key is not set")]
    MissingApiKey(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptConfig {
    pub role: RoleSpec,
    pub definitions: Vec<DefinitionEntry>,
}

impl Default for PromptConfig {
    fn default() -> Self {
        PromptConfig {
            role: RoleSpec::default(),
            definitions: default_definitions(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Mock,
    Remote,
}

impl std::str::FromStr for BackendKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock" => Ok(BackendKind::Mock),
            "remote" => Ok(BackendKind::Remote),
            other => Err(ConfigError::Invalid(format!("unknown backend {other:?}, expected mock or remote"))),
        }
    }
}

/// Backend selection. The API key itself never lives in the file; only
/// the name of the environment variable holding it does.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub base_url: String,
    pub model_name: String,
    pub api_key_env: String,
    pub timeout_ms: u64,
    pub retries: u32,
    pub backoff_ms: u64,
    pub max_concurrent: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Mock,
            base_url: "https://api.openai.com/v1".into(),
            model_name: "gpt-4o-mini".into(),
            api_key_env: "KGEXPLAIN_API_KEY".into(),
            timeout_ms: 30_000,
            retries: 2,
            backoff_ms: 500,
            max_concurrent: 4,
        }
    }
}

impl BackendConfig {
    pub fn build_gateway(&self) -> Result<Gateway, ConfigError> {
        match self.kind {
            BackendKind::Mock => Ok(Gateway::new(Box::new(MockBackend::new()))),
            BackendKind::Remote => {
                let api_key = std::env::var(&self.api_key_env)
                    .ok()
                    .filter(|k| !k.trim().is_empty())
                    .ok_or_else(|| ConfigError::MissingApiKey(self.api_key_env.clone()))?;
                let backend = RemoteBackend::new(RemoteConfig {
                    base_url: self.base_url.clone(),
                    model_name: self.model_name.clone(),
                    api_key,
                    timeout_ms: self.timeout_ms,
                    retries: self.retries,
                    backoff_ms: self.backoff_ms,
                    max_concurrent: self.max_concurrent,
                })?;
                Ok(Gateway::new(Box::new(backend)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    /// Idle sessions older than this are evicted.
    pub session_ttl_secs: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { session_ttl_secs: 1800 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub similarity: SimilarityConfig,
    pub recommender: RecommenderConfig,
    pub context: ContextLimits,
    pub prompt: PromptConfig,
    pub template: ExplanationTemplate,
    pub backend: BackendConfig,
    pub service: ServiceConfig,
    pub eval: EvalConfig,
}

impl AppConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: AppConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    /// Defaults when `path` is `None`.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, ConfigError> {
        path.map_or_else(|| Ok(AppConfig::default()), Self::load)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        self.similarity.validate().map_err(|e| invalid(&e))?;
        self.recommender.validate().map_err(|e| invalid(&e))?;
        self.template.validate().map_err(|e| invalid(&e))?;
        if self.prompt.role.persona.trim().is_empty() {
            return Err(ConfigError::Invalid("prompt.role must not be empty".into()));
        }
        if self.backend.max_concurrent == 0 {
            return Err(ConfigError::Invalid("backend.max_concurrent must be at least 1".into()));
        }
        if self.eval.jobs == 0 {
            return Err(ConfigError::Invalid("eval.jobs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn explain_settings(&self) -> ExplainSettings {
        ExplainSettings {
            role: self.prompt.role.clone(),
            definitions: self.prompt.definitions.clone(),
            template: self.template.clone(),
            limits: self.context,
        }
    }
}
