//! Error type carrying the process exit code.

use std::fmt;

use kgexplain_core::config::ConfigError;
use kgexplain_core::eval::EvalError;
use kgexplain_core::pipeline::ExplainError;
use kgexplain_core::prompt::PromptError;
use kgexplain_core::relations::ExtractError;
use kgexplain_core::{GatewayError, KgError, RecommendError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Other = 1,
    Usage = 2,
    Validation = 3,
    Backend = 4,
    EvaluationFailures = 5,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: ExitKind,
    pub message: String,
}

impl Failure {
    pub fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        Failure {
            kind,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Failure::new(ExitKind::Other, format!("{}: {err}", path.display()))
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ConfigError> for Failure {
    fn from(err: ConfigError) -> Self {
        let kind = match err {
            ConfigError::Io { .. } => ExitKind::Other,
            ConfigError::Parse(_) | ConfigError::Invalid(_) => ExitKind::Usage,
            ConfigError::MissingApiKey(_) | ConfigError::Gateway(_) => ExitKind::Backend,
        };
        Failure::new(kind, err.to_string())
    }
}

impl From<KgError> for Failure {
    fn from(err: KgError) -> Self {
        let kind = match err {
            KgError::Io(_) => ExitKind::Other,
            _ => ExitKind::Validation,
        };
        Failure::new(kind, err.to_string())
    }
}

impl From<RecommendError> for Failure {
    fn from(err: RecommendError) -> Self {
        Failure::new(ExitKind::Validation, err.to_string())
    }
}

impl From<ExtractError> for Failure {
    fn from(err: ExtractError) -> Self {
        Failure::new(ExitKind::Validation, err.to_string())
    }
}

impl From<GatewayError> for Failure {
    fn from(err: GatewayError) -> Self {
        Failure::new(ExitKind::Backend, err.to_string())
    }
}

impl From<ExplainError> for Failure {
    fn from(err: ExplainError) -> Self {
        let kind = match &err {
            ExplainError::Gateway(_) => ExitKind::Backend,
            // The backend answered but not in the slot protocol.
            ExplainError::Prompt(PromptError::MissingSlotAnswer(_) | PromptError::MalformedResponse(_)) => {
                ExitKind::Backend
            }
            _ => ExitKind::Validation,
        };
        Failure::new(kind, err.to_string())
    }
}

impl From<EvalError> for Failure {
    fn from(err: EvalError) -> Self {
        match err {
            EvalError::Explain(e) => e.into(),
            EvalError::Io(_) => Failure::new(ExitKind::Other, err.to_string()),
            _ => Failure::new(ExitKind::Validation, err.to_string()),
        }
    }
}
