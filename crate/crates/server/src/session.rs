//! Confirmation-gated question cycle of one learner session.
//!
//! ```text
//! AwaitingQuestion --ask--> AwaitingConfirmation --confirm(yes)--> Answered
//!        ^                          |                                 |
//!        +------confirm(no)---------+                                 |
//!        +------ask (new cycle) <-------------------------------------+
//! ```
//!
//! A failed generation returns the session to `AwaitingQuestion`. The
//! explanation generator is only ever invoked from an accepted
//! confirmation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use kgexplain_core::kg::{KnowledgeGraph, NodeId};
use kgexplain_core::pipeline::ExplainError;
use kgexplain_core::prompt::Explanation;
use kgexplain_core::recommend::LearningPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AwaitingQuestion,
    AwaitingConfirmation,
    Answered,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::AwaitingQuestion, Phase::AwaitingConfirmation, Phase::Answered];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::AwaitingQuestion => "awaiting_question",
            Phase::AwaitingConfirmation => "awaiting_confirmation",
            Phase::Answered => "answered",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionKind {
    AboutContent,
    WhyRelevant,
    PathRelations,
}

const RELATION_WORDS: [&str; 6] = ["relate", "relation", "connect", "between", "link", "compare"];
const WHY_WORDS: [&str; 6] = ["why", "relevant", "important", "goal", "need", "useful"];

impl QuestionKind {
    /// Relation keywords win over why-keywords; anything else asks about
    /// content.
    pub fn classify(question: &str) -> QuestionKind {
        let q = question.to_lowercase();
        if RELATION_WORDS.iter().any(|w| q.contains(w)) {
            QuestionKind::PathRelations
        } else if WHY_WORDS.iter().any(|w| q.contains(w)) {
            QuestionKind::WhyRelevant
        } else {
            QuestionKind::AboutContent
        }
    }

    fn phrase(self) -> &'static str {
        match self {
            QuestionKind::AboutContent => "what the material covers",
            QuestionKind::WhyRelevant => "why the material is relevant for your goal",
            QuestionKind::PathRelations => "how the material relates to the other materials on your path",
        }
    }

    /// Template slot that answers this kind of question most directly.
    pub fn focus_slot(self) -> &'static str {
        match self {
            QuestionKind::AboutContent => "content_overview",
            QuestionKind::WhyRelevant => "why_selected",
            QuestionKind::PathRelations => "related_materials",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interpretation {
    pub kind: QuestionKind,
    pub target: NodeId,
    pub target_title: String,
    pub text: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error("operation not allowed in phase {}", .actual.as_str())]
    WrongPhase { actual: Phase },
    #[error("question names no learning object on the path")]
    UnresolvedTarget { candidates: Vec<String> },
    #[error("question must not be empty")]
    EmptyQuestion,
    #[error(transparent)]
    Generation(#[from] ExplainError),
}

/// Learning objects on `path` with their titles, in path order.
fn path_objects<'a>(graph: &'a KnowledgeGraph, path: &'a LearningPath) -> Vec<(&'a NodeId, &'a str)> {
    path.steps
        .iter()
        .filter_map(|id| graph.node(id).ok())
        .filter(|n| n.level.is_learning_object())
        .map(|n| (&n.id, n.title.as_str()))
        .collect()
}

/// Reads the question: the target is the path object with the longest title
/// contained in the question (case-insensitive), earliest on the path among
/// equals.
pub fn interpret(graph: &KnowledgeGraph, path: &LearningPath, question: &str) -> Result<Interpretation, SessionError> {
    if question.trim().is_empty() {
        return Err(SessionError::EmptyQuestion);
    }
    let q = question.to_lowercase();
    let objects = path_objects(graph, path);
    let mut best: Option<(&NodeId, &str)> = None;
    for (id, title) in &objects {
        if q.contains(&title.to_lowercase()) && best.is_none_or(|(_, t)| title.len() > t.len()) {
            best = Some((id, title));
        }
    }
    let Some((target, title)) = best else {
        return Err(SessionError::UnresolvedTarget {
            candidates: objects.iter().map(|(_, t)| t.to_string()).collect(),
        });
    };
    let kind = QuestionKind::classify(question);
    Ok(Interpretation {
        kind,
        target: target.clone(),
        target_title: title.to_string(),
        text: format!("You are asking {} about \"{title}\" — correct?", kind.phrase()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub path: LearningPath,
    phase: Phase,
    pending: Option<Interpretation>,
    answered: Option<(Interpretation, Explanation)>,
}

/// Result of a confirmation.
#[derive(Debug, Clone, PartialEq)]
pub enum Confirmation {
    Answered { interpretation: Interpretation, explanation: Explanation },
    Rejected,
}

impl Session {
    pub fn new(id: String, path: LearningPath) -> Self {
        Session {
            id,
            path,
            phase: Phase::AwaitingQuestion,
            pending: None,
            answered: None,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Present exactly when awaiting confirmation.
    pub fn pending(&self) -> Option<&Interpretation> {
        self.pending.as_ref()
    }

    pub fn last_answer(&self) -> Option<&(Interpretation, Explanation)> {
        self.answered.as_ref()
    }

    /// Allowed while awaiting a question or after an answer (starting a new
    /// cycle). On error the phase is unchanged.
    pub fn ask(&mut self, graph: &KnowledgeGraph, question: &str) -> Result<&Interpretation, SessionError> {
        if self.phase == Phase::AwaitingConfirmation {
            return Err(SessionError::WrongPhase { actual: self.phase });
        }
        let interpretation = interpret(graph, &self.path, question)?;
        self.phase = Phase::AwaitingConfirmation;
        Ok(self.pending.insert(interpretation))
    }

    /// `generate` runs only when `accepted` is true and the session awaits
    /// confirmation.
    pub fn confirm<F>(&mut self, accepted: bool, generate: F) -> Result<Confirmation, SessionError>
    where
        F: FnOnce(&Interpretation) -> Result<Explanation, ExplainError>,
    {
        if self.phase != Phase::AwaitingConfirmation {
            return Err(SessionError::WrongPhase { actual: self.phase });
        }
        let interpretation = self.pending.take().expect("pending interpretation while awaiting confirmation");
        if !accepted {
            self.phase = Phase::AwaitingQuestion;
            return Ok(Confirmation::Rejected);
        }
        match generate(&interpretation) {
            Ok(explanation) => {
                self.phase = Phase::Answered;
                self.answered = Some((interpretation.clone(), explanation.clone()));
                Ok(Confirmation::Answered { interpretation, explanation })
            }
            Err(e) => {
                self.phase = Phase::AwaitingQuestion;
                Err(SessionError::Generation(e))
            }
        }
    }
}
