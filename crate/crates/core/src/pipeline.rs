//! One explanation end to end: context, prompt, generation, template fill.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::CommunityAssignment;
use crate::context::{assemble, render, ContextBundle, ContextError, ContextLimits, ContextText};
use crate::gateway::{Gateway, GatewayError, GenerationRequest};
use crate::kg::{KgError, KnowledgeGraph, NodeId};
use crate::prompt::{build_prompt, fill_template, DefinitionEntry, Explanation, ExplanationTemplate, PromptDocument, PromptError, RoleSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExplainError {
    #[error(transparent)]
    Graph(#[from] KgError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

/// Everything that shapes a prompt apart from the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainSettings {
    pub role: RoleSpec,
    pub definitions: Vec<DefinitionEntry>,
    pub template: ExplanationTemplate,
    pub limits: ContextLimits,
}

impl Default for ExplainSettings {
    fn default() -> Self {
        ExplainSettings {
            role: RoleSpec::default(),
            definitions: crate::prompt::default_definitions(),
            template: ExplanationTemplate::default(),
            limits: ContextLimits::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplainOutcome {
    pub bundle: Option<ContextBundle>,
    pub context: Option<ContextText>,
    pub prompt: PromptDocument,
    pub raw_response: String,
    pub explanation: Explanation,
}

/// Title of the learning goal at the root of `target`'s curriculum.
pub fn goal_title_for(graph: &KnowledgeGraph, target: &NodeId) -> Result<String, KgError> {
    let root = graph.taxonomy_root(target)?;
    Ok(graph.node(&root)?.title.clone())
}

/// Builds the prompt for `target`, with or without KG context.
pub fn prepare_prompt(
    graph: &KnowledgeGraph,
    assignment: &CommunityAssignment,
    target: &NodeId,
    goal_title: &str,
    with_context: bool,
    settings: &ExplainSettings,
) -> Result<(Option<ContextBundle>, PromptDocument), ExplainError> {
    let node = graph.node(target)?;
    let bundle = if with_context {
        Some(assemble(graph, assignment, target, &settings.limits)?)
    } else {
        None
    };
    let context = bundle.as_ref().map(render);
    let prompt = build_prompt(
        context.as_ref(),
        &settings.role,
        &settings.definitions,
        &settings.template,
        &node.title,
        goal_title,
    )?;
    Ok((bundle, prompt))
}

/// Borrowed view of everything needed to explain learning objects.
#[derive(Clone, Copy)]
pub struct Explainer<'a> {
    pub graph: &'a KnowledgeGraph,
    pub assignment: &'a CommunityAssignment,
    pub settings: &'a ExplainSettings,
    pub gateway: &'a Gateway,
}

impl Explainer<'_> {
    pub fn explain(
        &self,
        target: &NodeId,
        goal_title: &str,
        with_context: bool,
        trace_id: Option<&str>,
    ) -> Result<ExplainOutcome, ExplainError> {
        let (bundle, prompt) = prepare_prompt(
            self.graph,
            self.assignment,
            target,
            goal_title,
            with_context,
            self.settings,
        )?;
        let request = GenerationRequest {
            system_text: prompt.system_text(),
            user_text: prompt.user_text(),
            max_words: prompt.length_budget_words,
            backend_id: self.gateway.backend_id().to_string(),
            trace_id: trace_id.map(str::to_string),
        };
        let result = self.gateway.generate(&request)?;
        let explanation = fill_template(&self.settings.template, &result.text, prompt.is_contextualized())?;
        Ok(ExplainOutcome {
            context: prompt.context.clone(),
            bundle,
            prompt,
            raw_response: result.text,
            explanation,
        })
    }
}
