//! Baseline learning-path recommender.
//!
//! Exhaustive bounded search over simple paths. A path `n0 .. nk` scores
//!
//! ```text
//! sum_{i=1..k} discount^(i-1) * reward(n_{i-1}, n_i)  +  discount^k * goal_reward
//! ```
//!
//! where a taxonomy step earns `taxonomy_step_reward` and a semantic step
//! earns `weight * similarity_reward_scale`. Only paths ending inside the
//! goal's taxonomy tree are candidates. Learning goals may appear only as
//! the first or the last node. The highest score wins, then the
//! shorter path, then the lexicographically smaller id sequence.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::{KgError, KnowledgeGraph, NodeId, RelationClass, TaxonomyLevel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecommendError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("{0} is not a learning goal")]
    NotAGoal(NodeId),
    #[error("no path from {start} to goal {goal} within {max_len} nodes")]
    NoPathFound {
        start: NodeId,
        goal: NodeId,
        max_len: usize,
    },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid recommender config: {0}")]
    InvalidConfig(String),
}

impl From<KgError> for RecommendError {
    fn from(err: KgError) -> Self {
        match err {
            KgError::UnknownNode(id) => RecommendError::UnknownNode(id),
            other => RecommendError::InvalidPath(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecommenderConfig {
    pub discount: f64,
    /// Maximum number of nodes on a path, start included.
    pub max_path_len: usize,
    pub taxonomy_step_reward: f64,
    pub similarity_reward_scale: f64,
    pub goal_reward: f64,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        RecommenderConfig {
            discount: 0.9,
            max_path_len: 6,
            taxonomy_step_reward: 1.0,
            similarity_reward_scale: 1.0,
            goal_reward: 5.0,
        }
    }
}

impl RecommenderConfig {
    pub fn validate(&self) -> Result<(), RecommendError> {
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(RecommendError::InvalidConfig(format!(
                "discount {} outside (0, 1)",
                self.discount
            )));
        }
        if self.max_path_len == 0 {
            return Err(RecommendError::InvalidConfig("max_path_len must be >= 1".into()));
        }
        if self.goal_reward.is_nan() || self.goal_reward <= 0.0 {
            return Err(RecommendError::InvalidConfig("goal_reward must be > 0".into()));
        }
        if !self.taxonomy_step_reward.is_finite() || !self.similarity_reward_scale.is_finite() {
            return Err(RecommendError::InvalidConfig("rewards must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningPath {
    pub steps: Vec<NodeId>,
    pub goal: NodeId,
    /// Undiscounted reward of each transition; `steps.len() - 1` entries.
    pub step_scores: Vec<f64>,
    /// Discounted cumulative reward including the goal reward.
    pub score: f64,
}

/// How one transition was taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub via: RelationClass,
    /// Semantic weight; `None` for taxonomy steps.
    pub weight: Option<f64>,
    pub reward: f64,
}

/// Best transition between two adjacent nodes. When both a taxonomy and a
/// semantic edge exist, the higher reward is used (taxonomy on ties).
pub fn transition(
    graph: &KnowledgeGraph,
    from: &NodeId,
    to: &NodeId,
    cfg: &RecommenderConfig,
) -> Option<Transition> {
    let taxonomy = (graph.taxonomy_parent(to) == Some(from) || graph.taxonomy_parent(from) == Some(to))
        .then_some(Transition {
            via: RelationClass::Taxonomy,
            weight: None,
            reward: cfg.taxonomy_step_reward,
        });
    let semantic = graph.semantic_weight(from, to).map(|w| Transition {
        via: RelationClass::Semantic,
        weight: Some(w),
        reward: w * cfg.similarity_reward_scale,
    });
    match (taxonomy, semantic) {
        (Some(t), Some(s)) => Some(if s.reward > t.reward { s } else { t }),
        (t, s) => t.or(s),
    }
}

/// Discounted score of a path with the given transition rewards.
pub fn path_score(rewards: &[f64], cfg: &RecommenderConfig) -> f64 {
    let mut total = 0.0;
    for (i, r) in rewards.iter().enumerate() {
        total += cfg.discount.powi(i as i32) * r;
    }
    total + cfg.discount.powi(rewards.len() as i32) * cfg.goal_reward
}

fn goal_node(graph: &KnowledgeGraph, goal: &NodeId) -> Result<(), RecommendError> {
    let node = graph.node(goal)?;
    if node.level != TaxonomyLevel::LearningGoal {
        return Err(RecommendError::NotAGoal(goal.clone()));
    }
    Ok(())
}

struct Search<'a> {
    cfg: &'a RecommenderConfig,
    // ids ascending, so comparing index sequences compares id sequences
    ids: Vec<&'a NodeId>,
    adjacency: Vec<Vec<(usize, f64)>>,
    in_goal_tree: Vec<bool>,
    is_goal: Vec<bool>,
    on_path: Vec<bool>,
    path: Vec<usize>,
    rewards: Vec<f64>,
    best: Option<(f64, Vec<usize>, Vec<f64>)>,
}

impl<'a> Search<'a> {
    fn new(graph: &'a KnowledgeGraph, goal: &NodeId, cfg: &'a RecommenderConfig) -> Self {
        let ids: Vec<&NodeId> = graph.nodes().map(|n| &n.id).collect();
        let index: BTreeMap<&NodeId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let adjacency = ids
            .iter()
            .map(|id| {
                let mut next: Vec<(usize, f64)> = graph
                    .neighbors(id, None)
                    .expect("node exists")
                    .into_iter()
                    .map(|(n, _)| index[&n])
                    .collect::<std::collections::BTreeSet<_>>()
                    .into_iter()
                    .map(|j| (j, transition(graph, id, ids[j], cfg).expect("adjacent").reward))
                    .collect();
                next.sort_by_key(|(j, _)| *j);
                next
            })
            .collect();
        let in_goal_tree = ids
            .iter()
            .map(|id| &graph.taxonomy_root(id).expect("node exists") == goal)
            .collect();
        let is_goal = ids
            .iter()
            .map(|id| graph.node(id).expect("node exists").level == TaxonomyLevel::LearningGoal)
            .collect();
        Search {
            cfg,
            is_goal,
            on_path: vec![false; ids.len()],
            ids,
            adjacency,
            in_goal_tree,
            path: Vec::new(),
            rewards: Vec::new(),
            best: None,
        }
    }

    fn visit(&mut self, node: usize) {
        self.path.push(node);
        self.on_path[node] = true;
        if self.in_goal_tree[node] {
            self.offer();
        }
        let passable = self.path.len() == 1 || !self.is_goal[node];
        if passable && self.path.len() < self.cfg.max_path_len {
            for k in 0..self.adjacency[node].len() {
                let (next, reward) = self.adjacency[node][k];
                if self.on_path[next] {
                    continue;
                }
                self.rewards.push(reward);
                self.visit(next);
                self.rewards.pop();
            }
        }
        self.on_path[node] = false;
        self.path.pop();
    }

    fn offer(&mut self) {
        let score = path_score(&self.rewards, self.cfg);
        let better = match &self.best {
            None => true,
            Some((best_score, best_steps, _)) => {
                compare_candidates(score, &self.path, *best_score, best_steps) == Ordering::Less
            }
        };
        if better {
            self.best = Some((score, self.path.clone(), self.rewards.clone()));
        }
    }
}

/// `Less` means the first candidate is preferred.
fn compare_candidates(score: f64, steps: &[usize], best_score: f64, best_steps: &[usize]) -> Ordering {
    best_score
        .partial_cmp(&score)
        .unwrap_or(Ordering::Equal)
        .then(steps.len().cmp(&best_steps.len()))
        .then_with(|| steps.cmp(best_steps))
}

pub fn recommend_path(
    graph: &KnowledgeGraph,
    start: &NodeId,
    goal: &NodeId,
    cfg: &RecommenderConfig,
) -> Result<LearningPath, RecommendError> {
    cfg.validate()?;
    graph.node(start)?;
    goal_node(graph, goal)?;
    let mut search = Search::new(graph, goal, cfg);
    let start_idx = search.ids.binary_search(&start).expect("start exists");
    search.visit(start_idx);
    match search.best {
        Some((score, steps, step_scores)) => Ok(LearningPath {
            steps: steps.into_iter().map(|i| search.ids[i].clone()).collect(),
            goal: goal.clone(),
            step_scores,
            score,
        }),
        None => Err(RecommendError::NoPathFound {
            start: start.clone(),
            goal: goal.clone(),
            max_len: cfg.max_path_len,
        }),
    }
}

/// Raw facts behind one step of a recommended path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFacts {
    /// Edge used to reach this node; `None` for the first node.
    pub arrived_via: Option<Transition>,
    /// Discounted reward of the incoming transition plus, on the last step,
    /// the discounted goal reward.
    pub contribution: f64,
    /// Running discounted total after this step.
    pub cumulative: f64,
    pub parent_chain: Vec<NodeId>,
    pub reaches_goal_tree: bool,
}

/// Checks that `path` is a simple walk over graph edges ending inside the
/// goal's tree.
pub fn validate_path(graph: &KnowledgeGraph, path: &LearningPath, cfg: &RecommenderConfig) -> Result<Vec<Transition>, RecommendError> {
    if path.steps.is_empty() {
        return Err(RecommendError::InvalidPath("path has no steps".into()));
    }
    goal_node(graph, &path.goal)?;
    for (i, step) in path.steps.iter().enumerate() {
        graph.node(step)?;
        if path.steps[..i].contains(step) {
            return Err(RecommendError::InvalidPath(format!("node {step} repeats")));
        }
        let inner = i > 0 && i + 1 < path.steps.len();
        if inner && graph.node(step)?.level == TaxonomyLevel::LearningGoal {
            return Err(RecommendError::InvalidPath(format!("learning goal {step} inside the path")));
        }
    }
    let mut transitions = Vec::new();
    for pair in path.steps.windows(2) {
        let t = transition(graph, &pair[0], &pair[1], cfg).ok_or_else(|| {
            RecommendError::InvalidPath(format!("no edge between {} and {}", pair[0], pair[1]))
        })?;
        transitions.push(t);
    }
    let last = path.steps.last().expect("non-empty");
    if graph.taxonomy_root(last)? != path.goal {
        return Err(RecommendError::InvalidPath(format!(
            "last step {last} is outside the tree of goal {}",
            path.goal
        )));
    }
    Ok(transitions)
}

pub fn path_rationale(
    graph: &KnowledgeGraph,
    path: &LearningPath,
    cfg: &RecommenderConfig,
) -> Result<Vec<(NodeId, StepFacts)>, RecommendError> {
    let transitions = validate_path(graph, path, cfg)?;
    let last = path.steps.len() - 1;
    let mut cumulative = 0.0;
    let mut out = Vec::with_capacity(path.steps.len());
    for (i, step) in path.steps.iter().enumerate() {
        let arrived_via = i.checked_sub(1).map(|t| transitions[t]);
        let mut contribution = arrived_via.map_or(0.0, |t| cfg.discount.powi(i as i32 - 1) * t.reward);
        if i == last {
            contribution += cfg.discount.powi(last as i32) * cfg.goal_reward;
        }
        cumulative += contribution;
        let root = graph.taxonomy_root(step)?;
        out.push((
            step.clone(),
            StepFacts {
                arrived_via,
                contribution,
                cumulative,
                parent_chain: graph.parent_chain(step)?,
                reaches_goal_tree: root == path.goal,
            },
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{Edge, LearningObjectNode};
    use TaxonomyLevel::*;

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    fn chain() -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for (i, l) in [("g1", LearningGoal), ("c1", Course), ("t1", Topic), ("o1", Oer)] {
            g.add_node(LearningObjectNode::new(i, l, i, "d")).unwrap();
        }
        g.add_edge(Edge::taxonomy(&id("g1"), &id("c1"))).unwrap();
        g.add_edge(Edge::taxonomy(&id("c1"), &id("t1"))).unwrap();
        g.add_edge(Edge::taxonomy(&id("t1"), &id("o1"))).unwrap();
        g
    }

    #[test]
    fn unique_chain_path() {
        let g = chain();
        let p = recommend_path(&g, &id("o1"), &id("g1"), &RecommenderConfig::default()).unwrap();
        assert_eq!(p.steps, [id("o1"), id("t1"), id("c1"), id("g1")]);
        assert_eq!(p.step_scores, [1.0, 1.0, 1.0]);
        // 1 + 0.9 + 0.81 + 0.729 * 5
        assert!((p.score - 6.355).abs() < 1e-12);
    }

    #[test]
    fn single_node_when_length_is_one() {
        let g = chain();
        let cfg = RecommenderConfig { max_path_len: 1, ..Default::default() };
        let p = recommend_path(&g, &id("t1"), &id("g1"), &cfg).unwrap();
        assert_eq!(p.steps, [id("t1")]);
        assert!(p.step_scores.is_empty());
        assert_eq!(p.score, 5.0);
        let facts = path_rationale(&g, &p, &cfg).unwrap();
        assert_eq!(facts.len(), 1);
        assert!(facts[0].1.arrived_via.is_none());
        assert_eq!(facts[0].1.contribution, 5.0);
    }

    #[test]
    fn errors() {
        let mut g = chain();
        let cfg = RecommenderConfig::default();
        assert_eq!(
            recommend_path(&g, &id("o1"), &id("t1"), &cfg),
            Err(RecommendError::NotAGoal(id("t1")))
        );
        assert_eq!(
            recommend_path(&g, &id("zz"), &id("g1"), &cfg),
            Err(RecommendError::UnknownNode(id("zz")))
        );
        g.add_node(LearningObjectNode::new("g2", LearningGoal, "g2", "d")).unwrap();
        assert!(matches!(
            recommend_path(&g, &id("o1"), &id("g2"), &cfg),
            Err(RecommendError::NoPathFound { .. })
        ));
        let bad = RecommenderConfig { discount: 1.0, ..Default::default() };
        assert!(matches!(recommend_path(&g, &id("o1"), &id("g1"), &bad), Err(RecommendError::InvalidConfig(_))));
    }

    #[test]
    fn rationale_of_chain() {
        let g = chain();
        let cfg = RecommenderConfig::default();
        let p = recommend_path(&g, &id("o1"), &id("g1"), &cfg).unwrap();
        let facts = path_rationale(&g, &p, &cfg).unwrap();
        assert_eq!(facts.len(), 4);
        for (_, f) in &facts[1..] {
            assert_eq!(f.arrived_via.unwrap().via, RelationClass::Taxonomy);
        }
        assert_eq!(facts[0].1.parent_chain, [id("g1"), id("c1"), id("t1")]);
        assert!((facts[3].1.cumulative - p.score).abs() < 1e-12);
    }

    #[test]
    fn invalid_paths_are_rejected() {
        let g = chain();
        let cfg = RecommenderConfig::default();
        let mk = |steps: &[&str]| LearningPath {
            steps: steps.iter().map(|s| id(s)).collect(),
            goal: id("g1"),
            step_scores: vec![],
            score: 0.0,
        };
        for steps in [&[][..], &["o1", "c1"], &["o1", "t1", "o1"]] {
            assert!(matches!(path_rationale(&g, &mk(steps), &cfg), Err(RecommendError::InvalidPath(_))), "{steps:?}");
        }
    }

    #[test]
    fn semantic_edges_take_higher_reward() {
        let mut g = chain();
        g.add_edge(Edge::semantic(&id("t1"), &id("o1"), 0.5)).unwrap();
        let cfg = RecommenderConfig { similarity_reward_scale: 4.0, ..Default::default() };
        let t = transition(&g, &id("o1"), &id("t1"), &cfg).unwrap();
        assert_eq!(t.via, RelationClass::Semantic);
        assert_eq!(t.reward, 2.0);
        let t = transition(&g, &id("o1"), &id("t1"), &RecommenderConfig::default()).unwrap();
        assert_eq!(t.via, RelationClass::Taxonomy);
        assert!(transition(&g, &id("o1"), &id("c1"), &cfg).is_none());
    }
}
