//! Typed knowledge graph of learning goals and learning objects.
//!
//! The graph is a set of `(head, relation, tail)` triples over two relation
//! kinds: curriculum placement (`TaxonomyChild`, a level-ordered forest) and
//! weighted, symmetric `SemanticSimilar` links between learning objects.
//!
//! Graphs persist as line-delimited JSON. Every line is one record:
//!
//! ```text
//! {"type":"node","id":"o1","level":"oer","title":"...","description":"...","reflection_info":"","keywords":[]}
//! {"type":"edge","head":"t1","tail":"o1","kind":"taxonomy_child"}
//! {"type":"edge","head":"o1","tail":"o2","kind":"semantic_similar","weight":0.8}
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KgError {
    #[error("node id must be non-empty")]
    EmptyId,
    #[error("node {0} must have a non-empty title")]
    EmptyTitle(NodeId),
    #[error("duplicate node id {0}")]
    DuplicateNodeId(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("edge {head} -> {tail} references unknown endpoint {missing}")]
    UnknownEndpoint {
        head: NodeId,
        tail: NodeId,
        missing: NodeId,
    },
    #[error("edge {0} -> {0} links a node to itself")]
    SelfLoop(NodeId),
    #[error("taxonomy edge {head} -> {tail} would create a cycle")]
    TaxonomyCycle { head: NodeId, tail: NodeId },
    #[error("taxonomy edge {head} ({head_level}) -> {tail} ({tail_level}) violates level order")]
    LevelOrderViolation {
        head: NodeId,
        head_level: TaxonomyLevel,
        tail: NodeId,
        tail_level: TaxonomyLevel,
    },
    #[error("node {tail} already has taxonomy parent {existing}")]
    MultipleParents { tail: NodeId, existing: NodeId },
    #[error("duplicate {kind} edge between {head} and {tail}")]
    DuplicateEdge {
        head: NodeId,
        tail: NodeId,
        kind: RelationClass,
    },
    #[error("semantic weight {0} outside (0, 1]")]
    InvalidWeight(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    InvariantViolation {
        line: usize,
        #[source]
        source: Box<KgError>,
    },
    #[error("edges present but the node list is empty")]
    EdgesWithoutNodes,
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for KgError {
    fn from(err: std::io::Error) -> Self {
        KgError::Io(err.to_string())
    }
}

/// Identifier of a node; never empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Result<Self, KgError> {
        let id = id.into();
        if id.is_empty() {
            return Err(KgError::EmptyId);
        }
        Ok(NodeId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for NodeId {
    type Error = KgError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        NodeId::new(value)
    }
}

impl From<NodeId> for String {
    fn from(id: NodeId) -> Self {
        id.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Curriculum level, ordered from the root (`LearningGoal`) to the leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaxonomyLevel {
    LearningGoal,
    Course,
    Topic,
    Oer,
}

impl TaxonomyLevel {
    /// Courses, topics and OERs are learning objects; goals are not.
    pub fn is_learning_object(self) -> bool {
        self != TaxonomyLevel::LearningGoal
    }

    pub fn label(self) -> &'static str {
        match self {
            TaxonomyLevel::LearningGoal => "learning goal",
            TaxonomyLevel::Course => "course",
            TaxonomyLevel::Topic => "topic",
            TaxonomyLevel::Oer => "OER",
        }
    }
}

impl fmt::Display for TaxonomyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningObjectNode {
    pub id: NodeId,
    pub level: TaxonomyLevel,
    pub title: String,
    pub description: String,
    #[serde(default)]
    pub reflection_info: String,
    #[serde(default)]
    pub keywords: Vec<String>,
}

impl LearningObjectNode {
    pub fn new(id: &str, level: TaxonomyLevel, title: &str, description: &str) -> Self {
        LearningObjectNode {
            id: NodeId(id.to_string()),
            level,
            title: title.to_string(),
            description: description.to_string(),
            reflection_info: String::new(),
            keywords: Vec::new(),
        }
    }

    pub fn with_reflection(mut self, reflection: &str) -> Self {
        self.reflection_info = reflection.to_string();
        self
    }

    pub fn with_keywords(mut self, keywords: &[&str]) -> Self {
        self.keywords = keywords.iter().map(|k| k.to_string()).collect();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelationKind {
    /// Parent to child placement within one curriculum.
    TaxonomyChild,
    /// Symmetric content similarity with weight in (0, 1].
    SemanticSimilar(f64),
}

impl RelationKind {
    pub fn class(self) -> RelationClass {
        match self {
            RelationKind::TaxonomyChild => RelationClass::Taxonomy,
            RelationKind::SemanticSimilar(_) => RelationClass::Semantic,
        }
    }

    pub fn weight(self) -> Option<f64> {
        match self {
            RelationKind::TaxonomyChild => None,
            RelationKind::SemanticSimilar(w) => Some(w),
        }
    }
}

/// Relation kind without its payload, used for filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationClass {
    Taxonomy,
    Semantic,
}

impl fmt::Display for RelationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationClass::Taxonomy => "taxonomy",
            RelationClass::Semantic => "semantic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub head: NodeId,
    pub tail: NodeId,
    pub kind: RelationKind,
}

impl Edge {
    pub fn taxonomy(head: &NodeId, tail: &NodeId) -> Self {
        Edge {
            head: head.clone(),
            tail: tail.clone(),
            kind: RelationKind::TaxonomyChild,
        }
    }

    pub fn semantic(a: &NodeId, b: &NodeId, weight: f64) -> Self {
        Edge {
            head: a.clone(),
            tail: b.clone(),
            kind: RelationKind::SemanticSimilar(weight),
        }
    }
}

fn unordered(a: &NodeId, b: &NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// Validated knowledge graph. Mutation only goes through [`add_node`] and
/// [`add_edge`], both of which keep every invariant.
///
/// [`add_node`]: KnowledgeGraph::add_node
/// [`add_edge`]: KnowledgeGraph::add_edge
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    nodes: BTreeMap<NodeId, LearningObjectNode>,
    edges: Vec<Edge>,
    parent: BTreeMap<NodeId, NodeId>,
    children: BTreeMap<NodeId, BTreeSet<NodeId>>,
    semantic: BTreeMap<NodeId, BTreeMap<NodeId, f64>>,
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, node: LearningObjectNode) -> Result<(), KgError> {
        if node.id.0.is_empty() {
            return Err(KgError::EmptyId);
        }
        if node.title.trim().is_empty() {
            return Err(KgError::EmptyTitle(node.id));
        }
        if self.nodes.contains_key(&node.id) {
            return Err(KgError::DuplicateNodeId(node.id));
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    pub fn add_edge(&mut self, edge: Edge) -> Result<(), KgError> {
        let missing = [&edge.head, &edge.tail]
            .into_iter()
            .find(|id| !self.nodes.contains_key(*id));
        if let Some(missing) = missing {
            return Err(KgError::UnknownEndpoint {
                head: edge.head.clone(),
                tail: edge.tail.clone(),
                missing: missing.clone(),
            });
        }
        if edge.head == edge.tail {
            return Err(KgError::SelfLoop(edge.head));
        }
        match edge.kind {
            RelationKind::TaxonomyChild => self.check_taxonomy_edge(&edge.head, &edge.tail)?,
            RelationKind::SemanticSimilar(w) => {
                if !(w > 0.0 && w <= 1.0) {
                    return Err(KgError::InvalidWeight(w));
                }
                if self.semantic_weight(&edge.head, &edge.tail).is_some() {
                    let (head, tail) = unordered(&edge.head, &edge.tail);
                    return Err(KgError::DuplicateEdge {
                        head,
                        tail,
                        kind: RelationClass::Semantic,
                    });
                }
            }
        }

        match edge.kind {
            RelationKind::TaxonomyChild => {
                self.parent.insert(edge.tail.clone(), edge.head.clone());
                self.children
                    .entry(edge.head.clone())
                    .or_default()
                    .insert(edge.tail.clone());
            }
            RelationKind::SemanticSimilar(w) => {
                self.semantic
                    .entry(edge.head.clone())
                    .or_default()
                    .insert(edge.tail.clone(), w);
                self.semantic
                    .entry(edge.tail.clone())
                    .or_default()
                    .insert(edge.head.clone(), w);
            }
        }
        self.edges.push(edge);
        Ok(())
    }

    fn check_taxonomy_edge(&self, head: &NodeId, tail: &NodeId) -> Result<(), KgError> {
        if self.parent.get(tail) == Some(head) {
            return Err(KgError::DuplicateEdge {
                head: head.clone(),
                tail: tail.clone(),
                kind: RelationClass::Taxonomy,
            });
        }
        // tail must not be an ancestor of head
        let mut cursor = Some(head);
        while let Some(id) = cursor {
            if id == tail {
                return Err(KgError::TaxonomyCycle {
                    head: head.clone(),
                    tail: tail.clone(),
                });
            }
            cursor = self.parent.get(id);
        }
        let head_level = self.nodes[head].level;
        let tail_level = self.nodes[tail].level;
        if head_level >= tail_level {
            return Err(KgError::LevelOrderViolation {
                head: head.clone(),
                head_level,
                tail: tail.clone(),
                tail_level,
            });
        }
        if let Some(existing) = self.parent.get(tail) {
            return Err(KgError::MultipleParents {
                tail: tail.clone(),
                existing: existing.clone(),
            });
        }
        Ok(())
    }

    pub fn node(&self, id: &NodeId) -> Result<&LearningObjectNode, KgError> {
        self.nodes.get(id).ok_or_else(|| KgError::UnknownNode(id.clone()))
    }

    pub fn get(&self, id: &str) -> Option<&LearningObjectNode> {
        self.nodes.get(&NodeId(id.to_string()))
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = &LearningObjectNode> {
        self.nodes.values()
    }

    /// Learning objects (courses, topics, OERs) in ascending id order.
    pub fn learning_objects(&self) -> impl Iterator<Item = &LearningObjectNode> {
        self.nodes.values().filter(|n| n.level.is_learning_object())
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self, class: RelationClass) -> usize {
        self.edges.iter().filter(|e| e.kind.class() == class).count()
    }

    pub fn taxonomy_parent(&self, id: &NodeId) -> Option<&NodeId> {
        self.parent.get(id)
    }

    pub fn semantic_weight(&self, a: &NodeId, b: &NodeId) -> Option<f64> {
        self.semantic.get(a).and_then(|m| m.get(b)).copied()
    }

    /// Ancestors of `id`, root first. Empty for a root.
    pub fn parent_chain(&self, id: &NodeId) -> Result<Vec<NodeId>, KgError> {
        self.node(id)?;
        let mut chain = Vec::new();
        let mut cursor = self.parent.get(id);
        while let Some(p) = cursor {
            chain.push(p.clone());
            cursor = self.parent.get(p);
        }
        chain.reverse();
        Ok(chain)
    }

    /// Root of the taxonomy tree containing `id` (the node itself for a root).
    pub fn taxonomy_root(&self, id: &NodeId) -> Result<NodeId, KgError> {
        let chain = self.parent_chain(id)?;
        Ok(chain.into_iter().next().unwrap_or_else(|| id.clone()))
    }

    /// Edges incident to `id`, optionally restricted to one relation class.
    /// Taxonomy neighbours (parent and children) come first, then semantic
    /// neighbours; each group is sorted by node id.
    pub fn neighbors(
        &self,
        id: &NodeId,
        filter: Option<RelationClass>,
    ) -> Result<Vec<(NodeId, RelationKind)>, KgError> {
        self.node(id)?;
        let mut out = Vec::new();
        if filter.is_none_or(|c| c == RelationClass::Taxonomy) {
            let mut tax: Vec<NodeId> = self.parent.get(id).into_iter().cloned().collect();
            if let Some(children) = self.children.get(id) {
                tax.extend(children.iter().cloned());
            }
            tax.sort();
            out.extend(tax.into_iter().map(|n| (n, RelationKind::TaxonomyChild)));
        }
        if filter.is_none_or(|c| c == RelationClass::Semantic) {
            if let Some(sem) = self.semantic.get(id) {
                out.extend(
                    sem.iter()
                        .map(|(n, w)| (n.clone(), RelationKind::SemanticSimilar(*w))),
                );
            }
        }
        Ok(out)
    }

    /// Semantic neighbours of `id` as `(node, weight)`, ascending id.
    pub fn semantic_neighbors(&self, id: &NodeId) -> Vec<(&NodeId, f64)> {
        self.semantic
            .get(id)
            .map(|m| m.iter().map(|(n, w)| (n, *w)).collect())
            .unwrap_or_default()
    }

    pub fn save<W: Write>(&self, mut out: W) -> Result<(), KgError> {
        for node in self.nodes.values() {
            let line = serde_json::to_string(&Record::Node(node.clone()))
                .map_err(|e| KgError::Io(e.to_string()))?;
            writeln!(out, "{line}")?;
        }
        for edge in &self.edges {
            let line = serde_json::to_string(&Record::Edge(EdgeRecord::from(edge)))
                .map_err(|e| KgError::Io(e.to_string()))?;
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.save(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    /// Parses a corpus file. Nodes are inserted before edges regardless of
    /// their order in the file.
    pub fn load<R: BufRead>(input: R) -> Result<Self, KgError> {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let record: Record = serde_json::from_str(trimmed).map_err(|e| KgError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            match record {
                Record::Node(node) => nodes.push((line_no, node)),
                Record::Edge(edge) => edges.push((line_no, edge)),
            }
        }
        if nodes.is_empty() && !edges.is_empty() {
            return Err(KgError::InvariantViolation {
                line: edges[0].0,
                source: Box::new(KgError::EdgesWithoutNodes),
            });
        }
        let wrap = |line: usize| move |e: KgError| KgError::InvariantViolation { line, source: Box::new(e) };
        let mut graph = KnowledgeGraph::new();
        for (line, node) in nodes {
            graph.add_node(node).map_err(wrap(line))?;
        }
        for (line, record) in edges {
            let edge = record.into_edge().map_err(wrap(line))?;
            graph.add_edge(edge).map_err(wrap(line))?;
        }
        Ok(graph)
    }

    pub fn from_jsonl(text: &str) -> Result<Self, KgError> {
        Self::load(text.as_bytes())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Record {
    Node(LearningObjectNode),
    Edge(EdgeRecord),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum EdgeKindTag {
    TaxonomyChild,
    SemanticSimilar,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    head: NodeId,
    tail: NodeId,
    kind: EdgeKindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

impl From<&Edge> for EdgeRecord {
    fn from(edge: &Edge) -> Self {
        let (kind, weight) = match edge.kind {
            RelationKind::TaxonomyChild => (EdgeKindTag::TaxonomyChild, None),
            RelationKind::SemanticSimilar(w) => (EdgeKindTag::SemanticSimilar, Some(w)),
        };
        EdgeRecord {
            head: edge.head.clone(),
            tail: edge.tail.clone(),
            kind,
            weight,
        }
    }
}

impl EdgeRecord {
    fn into_edge(self) -> Result<Edge, KgError> {
        let kind = match (self.kind, self.weight) {
            (EdgeKindTag::TaxonomyChild, None) => RelationKind::TaxonomyChild,
            (EdgeKindTag::TaxonomyChild, Some(w)) => return Err(KgError::InvalidWeight(w)),
            (EdgeKindTag::SemanticSimilar, Some(w)) => RelationKind::SemanticSimilar(w),
            (EdgeKindTag::SemanticSimilar, None) => return Err(KgError::InvalidWeight(f64::NAN)),
        };
        Ok(Edge {
            head: self.head,
            tail: self.tail,
            kind,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use TaxonomyLevel::*;

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    fn node(i: &str, level: TaxonomyLevel) -> LearningObjectNode {
        LearningObjectNode::new(i, level, &format!("Title {i}"), &format!("About {i}."))
    }

    fn chain() -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for (i, l) in [("g1", LearningGoal), ("c1", Course), ("t1", Topic), ("o1", Oer)] {
            g.add_node(node(i, l)).unwrap();
        }
        g.add_edge(Edge::taxonomy(&id("g1"), &id("c1"))).unwrap();
        g.add_edge(Edge::taxonomy(&id("c1"), &id("t1"))).unwrap();
        g.add_edge(Edge::taxonomy(&id("t1"), &id("o1"))).unwrap();
        g
    }

    #[test]
    fn add_node_examples() {
        let mut g = KnowledgeGraph::new();
        g.add_node(node("g1", LearningGoal)).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(
            g.add_node(node("g1", LearningGoal)),
            Err(KgError::DuplicateNodeId(id("g1")))
        );
        g.add_node(node("c1", Course)).unwrap();
        assert_eq!(g.node_count(), 2);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn empty_ids_and_titles_rejected() {
        assert_eq!(NodeId::new(""), Err(KgError::EmptyId));
        let mut g = KnowledgeGraph::new();
        let mut n = node("x", Course);
        n.title = "  ".into();
        assert!(matches!(g.add_node(n), Err(KgError::EmptyTitle(_))));
    }

    #[test]
    fn add_edge_examples() {
        let mut g = KnowledgeGraph::new();
        for (i, l) in [("g1", LearningGoal), ("c1", Course), ("t1", Topic), ("o1", Oer), ("o2", Oer)] {
            g.add_node(node(i, l)).unwrap();
        }
        g.add_edge(Edge::taxonomy(&id("g1"), &id("c1"))).unwrap();
        assert!(matches!(
            g.add_edge(Edge::taxonomy(&id("t1"), &id("c1"))),
            Err(KgError::LevelOrderViolation { .. })
        ));
        g.add_edge(Edge::semantic(&id("o1"), &id("o2"), 0.8)).unwrap();
        assert!(matches!(
            g.add_edge(Edge::semantic(&id("o2"), &id("o1"), 0.7)),
            Err(KgError::DuplicateEdge { kind: RelationClass::Semantic, .. })
        ));
    }

    #[test]
    fn edge_validation_errors() {
        let mut g = chain();
        g.add_node(node("c2", Course)).unwrap();
        assert!(matches!(
            g.add_edge(Edge::taxonomy(&id("g1"), &id("zz"))),
            Err(KgError::UnknownEndpoint { .. })
        ));
        assert!(matches!(
            g.add_edge(Edge::semantic(&id("o1"), &id("o1"), 0.5)),
            Err(KgError::SelfLoop(_))
        ));
        assert!(matches!(
            g.add_edge(Edge::taxonomy(&id("o1"), &id("g1"))),
            Err(KgError::TaxonomyCycle { .. })
        ));
        assert!(matches!(
            g.add_edge(Edge::taxonomy(&id("c2"), &id("t1"))),
            Err(KgError::MultipleParents { .. })
        ));
        assert!(matches!(
            g.add_edge(Edge::taxonomy(&id("c1"), &id("t1"))),
            Err(KgError::DuplicateEdge { kind: RelationClass::Taxonomy, .. })
        ));
        assert!(matches!(
            g.add_edge(Edge::taxonomy(&id("c1"), &id("c2"))),
            Err(KgError::LevelOrderViolation { .. })
        ));
        for w in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                g.add_edge(Edge::semantic(&id("o1"), &id("c2"), w)),
                Err(KgError::InvalidWeight(_))
            ));
        }
        // skipping levels downward is allowed
        g.add_node(node("o9", Oer)).unwrap();
        g.add_edge(Edge::taxonomy(&id("c2"), &id("o9"))).unwrap();
    }

    #[test]
    fn parent_chain_examples() {
        let mut g = chain();
        assert_eq!(g.parent_chain(&id("o1")).unwrap(), [id("g1"), id("c1"), id("t1")]);
        assert!(g.parent_chain(&id("g1")).unwrap().is_empty());
        g.add_node(node("g2", LearningGoal)).unwrap();
        g.add_node(node("c9", Course)).unwrap();
        g.add_edge(Edge::taxonomy(&id("g2"), &id("c9"))).unwrap();
        assert_eq!(g.parent_chain(&id("c9")).unwrap(), [id("g2")]);
        assert_eq!(g.taxonomy_root(&id("o1")).unwrap(), id("g1"));
        assert_eq!(g.taxonomy_root(&id("g2")).unwrap(), id("g2"));
        assert!(matches!(g.parent_chain(&id("nope")), Err(KgError::UnknownNode(_))));
    }

    #[test]
    fn neighbor_examples() {
        let mut g = chain();
        g.add_node(node("o2", Oer)).unwrap();
        g.add_node(node("o3", Oer)).unwrap();
        g.add_edge(Edge::semantic(&id("o1"), &id("o2"), 0.8)).unwrap();
        assert_eq!(
            g.neighbors(&id("o1"), Some(RelationClass::Semantic)).unwrap(),
            [(id("o2"), RelationKind::SemanticSimilar(0.8))]
        );
        assert_eq!(
            g.neighbors(&id("o2"), Some(RelationClass::Semantic)).unwrap(),
            [(id("o1"), RelationKind::SemanticSimilar(0.8))]
        );
        assert!(g.neighbors(&id("o3"), None).unwrap().is_empty());
        assert_eq!(
            g.neighbors(&id("o1"), None).unwrap(),
            [
                (id("t1"), RelationKind::TaxonomyChild),
                (id("o2"), RelationKind::SemanticSimilar(0.8))
            ]
        );
        assert!(matches!(g.neighbors(&id("zz"), None), Err(KgError::UnknownNode(_))));
    }

    #[test]
    fn round_trip_chain() {
        let g = chain();
        let text = g.to_jsonl();
        assert_eq!(KnowledgeGraph::from_jsonl(&text).unwrap(), g);
    }

    #[test]
    fn load_rejects_dangling_edges() {
        let text = r#"{"type":"node","id":"o1","level":"oer","title":"A","description":"a"}
{"type":"edge","head":"o1","tail":"o2","kind":"semantic_similar","weight":0.5}
"#;
        match KnowledgeGraph::from_jsonl(text) {
            Err(KgError::InvariantViolation { line: 2, source }) => {
                assert!(matches!(*source, KgError::UnknownEndpoint { .. }))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_rejects_edges_without_nodes() {
        let text = r#"{"type":"edge","head":"a","tail":"b","kind":"taxonomy_child"}"#;
        match KnowledgeGraph::from_jsonl(text) {
            Err(KgError::InvariantViolation { source, .. }) => {
                assert_eq!(*source, KgError::EdgesWithoutNodes)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_reports_parse_diagnostics() {
        let text = "# comment\n\n{\"type\":\"node\",\"id\":\"x\",\"level\":\"chapter\",\"title\":\"T\",\"description\":\"d\"}\n";
        match KnowledgeGraph::from_jsonl(text) {
            Err(KgError::Parse { line: 3, message }) => assert!(message.contains("chapter"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
        let bad_kind = "{\"type\":\"node\",\"id\":\"x\",\"level\":\"oer\",\"title\":\"T\",\"description\":\"d\"}\n{\"type\":\"edge\",\"head\":\"x\",\"tail\":\"x\",\"kind\":\"prerequisite\"}";
        assert!(matches!(KnowledgeGraph::from_jsonl(bad_kind), Err(KgError::Parse { line: 2, .. })));
        let empty_id = "{\"type\":\"node\",\"id\":\"\",\"level\":\"oer\",\"title\":\"T\",\"description\":\"d\"}";
        assert!(matches!(KnowledgeGraph::from_jsonl(empty_id), Err(KgError::Parse { line: 1, .. })));
    }

    #[test]
    fn load_rejects_weight_mismatches() {
        let nodes = "{\"type\":\"node\",\"id\":\"a\",\"level\":\"course\",\"title\":\"A\",\"description\":\"d\"}\n{\"type\":\"node\",\"id\":\"b\",\"level\":\"topic\",\"title\":\"B\",\"description\":\"d\"}\n";
        let tax_weight = format!("{nodes}{{\"type\":\"edge\",\"head\":\"a\",\"tail\":\"b\",\"kind\":\"taxonomy_child\",\"weight\":0.3}}");
        assert!(matches!(KnowledgeGraph::from_jsonl(&tax_weight), Err(KgError::InvariantViolation { line: 3, .. })));
        let sem_no_weight = format!("{nodes}{{\"type\":\"edge\",\"head\":\"a\",\"tail\":\"b\",\"kind\":\"semantic_similar\"}}");
        assert!(matches!(KnowledgeGraph::from_jsonl(&sem_no_weight), Err(KgError::InvariantViolation { line: 3, .. })));
    }
}
