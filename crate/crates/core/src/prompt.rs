//! Two-part prompts (task body plus KG context) and slot-based explanation
//! templates.
//!
//! The model answers each slot inside a delimited block:
//!
//! ```text
//! <<SLOT:why_selected>>
//! ...answer...
//! <<END>>
//! ```
//!
//! Answers are whitespace-normalized and cut to the slot's word budget, so
//! the amount of generated text never depends on the backend.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::ContextText;
use crate::text::{truncate_words, word_count};

pub const SLOT_OPEN: &str = "<<SLOT:";
pub const SLOT_CLOSE: &str = ">>";
pub const SLOT_END: &str = "<<END>>";
pub const TASK_PREFIX: &str = "TASK ";
pub const CONTEXT_HEADER: &str = "SUPPORTING CONTENT";
pub const MIN_SLOT_BUDGET: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PromptError {
    #[error("invalid template: {0}")]
    InvalidTemplate(String),
    #[error("role persona must not be empty")]
    MissingRole,
    #[error("definition term {0:?} appears more than once")]
    DuplicateDefinition(String),
    #[error("response has no answer block for slot {0}")]
    MissingSlotAnswer(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RoleSpec {
    pub persona: String,
}

impl RoleSpec {
    pub fn new(persona: &str) -> Self {
        RoleSpec {
            persona: persona.to_string(),
        }
    }
}

impl Default for RoleSpec {
    fn default() -> Self {
        RoleSpec::new(
            "You are a teacher who explains learning recommendations to a learner. \
             Answer factually and only with information that is relevant to the learner's goal.",
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefinitionEntry {
    pub term: String,
    pub definition: String,
}

pub fn default_definitions() -> Vec<DefinitionEntry> {
    [
        ("learning goal", "the competence a learner wants to reach; the root of a curriculum"),
        ("learning object", "a course, topic or open educational resource (OER) that can be recommended"),
        ("learning path", "an ordered sequence of learning objects recommended to reach a learning goal"),
    ]
    .into_iter()
    .map(|(term, definition)| DefinitionEntry {
        term: term.into(),
        definition: definition.into(),
    })
    .collect()
}

/// A named gap in the explanation template and the task that fills it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSlot {
    pub name: String,
    pub budget_words: usize,
    /// Task statement; `{target}` and `{goal}` are replaced by titles.
    pub task: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplanationTemplate {
    /// Text with `{{slot_name}}` markers.
    pub text: String,
    pub slots: Vec<TemplateSlot>,
}

impl Default for ExplanationTemplate {
    fn default() -> Self {
        let slot = |name: &str, task: &str| TemplateSlot {
            name: name.into(),
            budget_words: 30,
            task: task.into(),
        };
        ExplanationTemplate {
            text: "Why this material: {{why_selected}}\n\
                   How it supports your goal: {{goal_support}}\n\
                   What it covers: {{content_overview}}\n\
                   How it connects: {{related_materials}}"
                .into(),
            slots: vec![
                slot("why_selected", "Explain why \"{target}\" is selected in this learning path."),
                slot("goal_support", "Explain how \"{target}\" supports achieving the learning goal \"{goal}\"."),
                slot("content_overview", "Describe the content that \"{target}\" covers."),
                slot("related_materials", "Describe how \"{target}\" relates to connected learning materials."),
            ],
        }
    }
}

fn marker(name: &str) -> String {
    format!("{{{{{name}}}}}")
}

/// Slot names referenced by `{{name}}` markers, in order of appearance.
fn markers_in(text: &str) -> Result<Vec<String>, PromptError> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find("{{") {
        let after = &rest[open + 2..];
        let close = after
            .find("}}")
            .ok_or_else(|| PromptError::InvalidTemplate("unterminated slot marker".into()))?;
        out.push(after[..close].to_string());
        rest = &after[close + 2..];
    }
    Ok(out)
}

fn valid_slot_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl ExplanationTemplate {
    pub fn validate(&self) -> Result<(), PromptError> {
        let invalid = |msg: String| Err(PromptError::InvalidTemplate(msg));
        if self.slots.is_empty() {
            return invalid("template declares no slots".into());
        }
        let mut names = BTreeSet::new();
        for slot in &self.slots {
            if !valid_slot_name(&slot.name) {
                return invalid(format!("slot name {:?} must match [a-z0-9_]+", slot.name));
            }
            if !names.insert(slot.name.as_str()) {
                return invalid(format!("slot {} declared twice", slot.name));
            }
            if slot.budget_words < MIN_SLOT_BUDGET {
                return invalid(format!(
                    "slot {} budget {} is below {MIN_SLOT_BUDGET} words",
                    slot.name, slot.budget_words
                ));
            }
            if slot.task.trim().is_empty() {
                return invalid(format!("slot {} has an empty task", slot.name));
            }
        }
        let markers = markers_in(&self.text)?;
        for slot in &self.slots {
            let n = markers.iter().filter(|m| **m == slot.name).count();
            if n != 1 {
                return invalid(format!("slot {} appears {n} times in the template text", slot.name));
            }
        }
        if let Some(extra) = markers.iter().find(|m| !names.contains(m.as_str())) {
            return invalid(format!("template text references undeclared slot {extra}"));
        }
        Ok(())
    }

    pub fn total_budget(&self) -> usize {
        self.slots.iter().map(|s| s.budget_words).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub slot: String,
    pub budget_words: usize,
    pub instruction: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBody {
    pub target_title: String,
    pub goal_title: String,
    pub tasks: Vec<Task>,
}

impl PromptBody {
    /// User message: the request, the answer protocol, one line per task.
    pub fn render(&self) -> String {
        let mut out = format!(
            "Explain the recommendation of \"{}\" on the learning path toward the goal \"{}\".\n\
             Complete every task below. Write each answer between the markers {SLOT_OPEN}name{SLOT_CLOSE} and {SLOT_END}, \
             using at most the stated number of words.\n",
            self.target_title, self.goal_title
        );
        for task in &self.tasks {
            out.push_str(&format!(
                "{TASK_PREFIX}{} (max {} words): {}\n",
                task.slot, task.budget_words, task.instruction
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptDocument {
    pub role: RoleSpec,
    pub definitions: Vec<DefinitionEntry>,
    /// `None` for the non-contextualized variant.
    pub context: Option<ContextText>,
    pub body: PromptBody,
    pub length_budget_words: usize,
}

impl PromptDocument {
    pub fn is_contextualized(&self) -> bool {
        self.context.is_some()
    }

    /// System message: role, definitions and, when present, the KG context.
    pub fn system_text(&self) -> String {
        let mut out = format!("ROLE\n{}\n", self.role.persona.trim());
        if !self.definitions.is_empty() {
            out.push_str("\nDEFINITIONS\n");
            for d in &self.definitions {
                out.push_str(&format!("- {}: {}\n", d.term, d.definition));
            }
        }
        if let Some(ctx) = &self.context {
            out.push('\n');
            out.push_str(CONTEXT_HEADER);
            out.push('\n');
            out.push_str(&ctx.to_prompt_text());
        }
        out
    }

    pub fn user_text(&self) -> String {
        self.body.render()
    }
}

pub fn build_prompt(
    context: Option<&ContextText>,
    role: &RoleSpec,
    definitions: &[DefinitionEntry],
    template: &ExplanationTemplate,
    target_title: &str,
    goal_title: &str,
) -> Result<PromptDocument, PromptError> {
    template.validate()?;
    if role.persona.trim().is_empty() {
        return Err(PromptError::MissingRole);
    }
    let mut terms = BTreeSet::new();
    for d in definitions {
        if !terms.insert(d.term.to_lowercase()) {
            return Err(PromptError::DuplicateDefinition(d.term.clone()));
        }
    }
    let tasks = template
        .slots
        .iter()
        .map(|slot| Task {
            slot: slot.name.clone(),
            budget_words: slot.budget_words,
            instruction: slot
                .task
                .replace("{target}", target_title)
                .replace("{goal}", goal_title),
        })
        .collect();
    Ok(PromptDocument {
        role: role.clone(),
        definitions: definitions.to_vec(),
        context: context.cloned(),
        body: PromptBody {
            target_title: target_title.to_string(),
            goal_title: goal_title.to_string(),
            tasks,
        },
        length_budget_words: template.total_budget(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotValue {
    pub name: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Explanation {
    pub filled_text: String,
    /// In template slot order.
    pub slot_values: Vec<SlotValue>,
    pub contextualized: bool,
}

impl Explanation {
    pub fn slot(&self, name: &str) -> Option<&str> {
        self.slot_values
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.text.as_str())
    }

    /// Generated content only, one slot per line.
    pub fn slot_content(&self) -> String {
        self.slot_values
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn slot_word_count(&self) -> usize {
        self.slot_values.iter().map(|s| word_count(&s.text)).sum()
    }
}

/// Splits a response into `(slot, raw answer)` blocks.
pub fn parse_slot_blocks(response: &str) -> Result<Vec<(String, String)>, PromptError> {
    let mut blocks: Vec<(String, String)> = Vec::new();
    let mut rest = response;
    while let Some(open) = rest.find(SLOT_OPEN) {
        let after_open = &rest[open + SLOT_OPEN.len()..];
        let close = after_open
            .find(SLOT_CLOSE)
            .ok_or_else(|| PromptError::MalformedResponse("unterminated slot marker".into()))?;
        let name = after_open[..close].trim().to_string();
        if !valid_slot_name(&name) {
            return Err(PromptError::MalformedResponse(format!("bad slot name {name:?}")));
        }
        let body_start = &after_open[close + SLOT_CLOSE.len()..];
        let end = body_start
            .find(SLOT_END)
            .ok_or_else(|| PromptError::MalformedResponse(format!("slot {name} has no {SLOT_END}")))?;
        let body = &body_start[..end];
        if body.contains(SLOT_OPEN) {
            return Err(PromptError::MalformedResponse(format!("slot {name} is not closed before the next slot")));
        }
        if blocks.iter().any(|(n, _)| *n == name) {
            return Err(PromptError::MalformedResponse(format!("slot {name} answered twice")));
        }
        blocks.push((name, body.to_string()));
        rest = &body_start[end + SLOT_END.len()..];
    }
    Ok(blocks)
}

/// Extracts one answer per template slot and substitutes them into the
/// template text. Blocks for unknown slots are ignored.
pub fn fill_template(
    template: &ExplanationTemplate,
    response: &str,
    contextualized: bool,
) -> Result<Explanation, PromptError> {
    template.validate()?;
    let blocks = parse_slot_blocks(response)?;
    let mut filled = template.text.clone();
    let mut slot_values = Vec::with_capacity(template.slots.len());
    for slot in &template.slots {
        let raw = blocks
            .iter()
            .find(|(n, _)| *n == slot.name)
            .map(|(_, body)| body.as_str())
            .ok_or_else(|| PromptError::MissingSlotAnswer(slot.name.clone()))?;
        let text = truncate_words(raw, slot.budget_words);
        filled = filled.replace(&marker(&slot.name), &text);
        slot_values.push(SlotValue {
            name: slot.name.clone(),
            text,
        });
    }
    Ok(Explanation {
        filled_text: filled,
        slot_values,
        contextualized,
    })
}

/// Wraps answers in the slot-block protocol.
pub fn format_slot_blocks<'a>(answers: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    let mut out = String::new();
    for (name, text) in answers {
        out.push_str(&format!("{SLOT_OPEN}{name}{SLOT_CLOSE}\n{text}\n{SLOT_END}\n"));
    }
    out
}
