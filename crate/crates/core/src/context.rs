//! Extracts the four kinds of KG context for a recommended learning object
//! and renders them as labelled text sections for the prompt.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::CommunityAssignment;
use crate::kg::{KgError, KnowledgeGraph, NodeId, TaxonomyLevel};
use crate::text::ensure_terminated;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContextError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("{0} is a learning goal, not a learning object")]
    NotALearningObject(NodeId),
}

impl From<KgError> for ContextError {
    fn from(err: KgError) -> Self {
        match err {
            KgError::UnknownNode(id) => ContextError::UnknownNode(id),
            other => unreachable!("context lookups only fail on unknown nodes: {other}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContextLimits {
    pub max_neighbors: usize,
    pub max_community: usize,
    pub max_support: usize,
}

impl Default for ContextLimits {
    fn default() -> Self {
        ContextLimits {
            max_neighbors: 5,
            max_community: 5,
            max_support: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyEntry {
    pub id: NodeId,
    pub level: TaxonomyLevel,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborEntry {
    pub id: NodeId,
    pub weight: f64,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberEntry {
    pub id: NodeId,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub id: NodeId,
    pub title: String,
    pub description: String,
    pub reflection_info: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextBundle {
    pub target: NodeId,
    /// The target's ancestors root first, followed by the target itself.
    pub hierarchy: Vec<HierarchyEntry>,
    /// Sorted by weight descending, then id.
    pub semantic_neighbors: Vec<NeighborEntry>,
    /// Other members of the target's community, ascending id.
    pub community_members: Vec<MemberEntry>,
    pub supporting_metadata: Vec<SupportEntry>,
}

pub fn assemble(
    graph: &KnowledgeGraph,
    assignment: &CommunityAssignment,
    target: &NodeId,
    limits: &ContextLimits,
) -> Result<ContextBundle, ContextError> {
    let node = graph.node(target)?;
    if !node.level.is_learning_object() {
        return Err(ContextError::NotALearningObject(target.clone()));
    }

    let mut hierarchy = Vec::new();
    for id in graph.parent_chain(target)?.iter().chain(std::iter::once(target)) {
        let n = graph.node(id)?;
        hierarchy.push(HierarchyEntry {
            id: id.clone(),
            level: n.level,
            title: n.title.clone(),
        });
    }

    let mut neighbors: Vec<(NodeId, f64)> = graph
        .semantic_neighbors(target)
        .into_iter()
        .map(|(id, w)| (id.clone(), w))
        .collect();
    neighbors.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    neighbors.truncate(limits.max_neighbors);

    let mut members: Vec<NodeId> = match assignment.community_of(target) {
        Ok(m) => m.into_iter().filter(|id| id != target).collect(),
        Err(_) => Vec::new(),
    };
    members.truncate(limits.max_community);

    // Supporting candidates: semantic weight first, then community
    // co-membership, then id.
    let mut candidates: Vec<(&NodeId, f64, bool)> = neighbors
        .iter()
        .map(|(id, w)| (id, *w, members.contains(id)))
        .collect();
    for m in &members {
        if !neighbors.iter().any(|(id, _)| id == m) {
            candidates.push((m, 0.0, true));
        }
    }
    candidates.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(b.2.cmp(&a.2))
            .then_with(|| a.0.cmp(b.0))
    });
    candidates.truncate(limits.max_support);

    let title_of = |id: &NodeId| graph.node(id).map(|n| n.title.clone());
    Ok(ContextBundle {
        target: target.clone(),
        hierarchy,
        semantic_neighbors: neighbors
            .iter()
            .map(|(id, w)| {
                Ok(NeighborEntry {
                    id: id.clone(),
                    weight: *w,
                    title: title_of(id)?,
                })
            })
            .collect::<Result<_, KgError>>()?,
        community_members: members
            .iter()
            .map(|id| {
                Ok(MemberEntry {
                    id: id.clone(),
                    title: title_of(id)?,
                })
            })
            .collect::<Result<_, KgError>>()?,
        supporting_metadata: candidates
            .into_iter()
            .map(|(id, _, _)| {
                let n = graph.node(id)?;
                Ok(SupportEntry {
                    id: id.clone(),
                    title: n.title.clone(),
                    description: n.description.clone(),
                    reflection_info: n.reflection_info.clone(),
                })
            })
            .collect::<Result<_, KgError>>()?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SectionLabel {
    Hierarchy,
    Related,
    Community,
    Supporting,
}

impl SectionLabel {
    pub const ALL: [SectionLabel; 4] = [
        SectionLabel::Hierarchy,
        SectionLabel::Related,
        SectionLabel::Community,
        SectionLabel::Supporting,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SectionLabel::Hierarchy => "HIERARCHY",
            SectionLabel::Related => "RELATED",
            SectionLabel::Community => "COMMUNITY",
            SectionLabel::Supporting => "SUPPORTING",
        }
    }

    /// Line that opens the section in rendered prompt text.
    pub fn marker(self) -> String {
        format!("[{}]", self.as_str())
    }
}

impl fmt::Display for SectionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rendered context: always the four sections in fixed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextText {
    pub sections: Vec<(SectionLabel, String)>,
}

impl ContextText {
    pub fn section(&self, label: SectionLabel) -> &str {
        self.sections
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, body)| body.as_str())
            .unwrap_or("")
    }

    /// Marker line followed by the body for every section.
    pub fn to_prompt_text(&self) -> String {
        let mut out = String::new();
        for (label, body) in &self.sections {
            out.push_str(&label.marker());
            out.push('\n');
            if !body.is_empty() {
                out.push_str(body);
                out.push('\n');
            }
        }
        out
    }
}

impl fmt::Display for ContextText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_prompt_text())
    }
}

pub fn render(bundle: &ContextBundle) -> ContextText {
    let hierarchy = bundle
        .hierarchy
        .iter()
        .map(|h| h.title.as_str())
        .collect::<Vec<_>>()
        .join(" > ");
    let related = bundle
        .semantic_neighbors
        .iter()
        .map(|n| format!("- {} (similarity={:.2})", n.title, n.weight))
        .collect::<Vec<_>>()
        .join("\n");
    let community = bundle
        .community_members
        .iter()
        .map(|m| format!("- {}", m.title))
        .collect::<Vec<_>>()
        .join("\n");
    let supporting = bundle
        .supporting_metadata
        .iter()
        .map(|s| {
            let mut block = format!("{}: {}", s.title, ensure_terminated(&s.description));
            let reflection = ensure_terminated(&s.reflection_info);
            if !reflection.is_empty() {
                block.push_str(" Reflection: ");
                block.push_str(&reflection);
            }
            block
        })
        .collect::<Vec<_>>()
        .join("\n");
    ContextText {
        sections: vec![
            (SectionLabel::Hierarchy, hierarchy),
            (SectionLabel::Related, related),
            (SectionLabel::Community, community),
            (SectionLabel::Supporting, supporting),
        ],
    }
}
