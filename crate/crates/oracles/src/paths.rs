//! Path recommendation by enumerating every simple path.

use std::collections::BTreeMap;

use kgexplain_core::kg::{KnowledgeGraph, NodeId, RelationKind, TaxonomyLevel};
use kgexplain_core::recommend::RecommenderConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Best {
    pub score: f64,
    pub steps: Vec<NodeId>,
}

fn root(parent: &BTreeMap<NodeId, NodeId>, mut id: NodeId) -> NodeId {
    while let Some(p) = parent.get(&id) {
        id = p.clone();
    }
    id
}

fn score(rewards: &[f64], cfg: &RecommenderConfig) -> f64 {
    let mut total = 0.0;
    for (i, r) in rewards.iter().enumerate() {
        total += cfg.discount.powi(i as i32) * r;
    }
    total + cfg.discount.powi(rewards.len() as i32) * cfg.goal_reward
}

/// Best path from `start` to any node rooted at `goal`: highest score,
/// then fewest nodes, then smallest id sequence. Learning goals may only be
/// the first or last node.
pub fn best_path(g: &KnowledgeGraph, start: &NodeId, goal: &NodeId, cfg: &RecommenderConfig) -> Option<Best> {
    let mut parent = BTreeMap::new();
    // undirected reward per unordered pair; the larger reward wins
    let mut reward: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
    for e in g.edges() {
        let r = match e.kind {
            RelationKind::TaxonomyChild => {
                parent.insert(e.tail.clone(), e.head.clone());
                cfg.taxonomy_step_reward
            }
            RelationKind::SemanticSimilar(w) => w * cfg.similarity_reward_scale,
        };
        for key in [(e.head.clone(), e.tail.clone()), (e.tail.clone(), e.head.clone())] {
            let slot = reward.entry(key).or_insert(r);
            if r > *slot {
                *slot = r;
            }
        }
    }
    let is_goal = |id: &NodeId| g.node(id).map(|n| n.level == TaxonomyLevel::LearningGoal).unwrap_or(false);

    let mut all: Vec<(Vec<NodeId>, Vec<f64>)> = Vec::new();
    let mut stack = vec![(vec![start.clone()], Vec::<f64>::new())];
    while let Some((path, rewards)) = stack.pop() {
        let last = path.last().unwrap().clone();
        if path.len() < cfg.max_path_len && (path.len() == 1 || !is_goal(&last)) {
            for ((a, b), r) in &reward {
                if *a == last && !path.contains(b) {
                    let mut p = path.clone();
                    p.push(b.clone());
                    let mut rs = rewards.clone();
                    rs.push(*r);
                    stack.push((p, rs));
                }
            }
        }
        all.push((path, rewards));
    }

    let mut best: Option<Best> = None;
    for (path, rewards) in all {
        if root(&parent, path.last().unwrap().clone()) != *goal {
            continue;
        }
        let s = score(&rewards, cfg);
        let better = match &best {
            None => true,
            Some(b) => {
                s > b.score
                    || (s == b.score && path.len() < b.steps.len())
                    || (s == b.score && path.len() == b.steps.len() && path < b.steps)
            }
        };
        if better {
            best = Some(Best { score: s, steps: path });
        }
    }
    best
}
