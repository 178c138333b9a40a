//! Seeded random and hand-built graphs for property tests.

use kgexplain_core::kg::{Edge, KnowledgeGraph, LearningObjectNode, NodeId, TaxonomyLevel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn id(s: &str) -> NodeId {
    NodeId::new(s).expect("non-empty id")
}

fn level_for(k: u32) -> TaxonomyLevel {
    match k {
        0 => TaxonomyLevel::Course,
        1 => TaxonomyLevel::Topic,
        _ => TaxonomyLevel::Oer,
    }
}

/// A random forest of `n` nodes (one or two goals, ids `n00..`) with
/// semantic links between learning objects drawn with probability
/// `link_prob` and weights in hundredths.
pub fn random_graph(seed: u64, n: usize, link_prob: f64) -> KnowledgeGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let goals = if n >= 4 { rng.random_range(1..=2) } else { 1 };
    let mut levels: Vec<TaxonomyLevel> = (0..n)
        .map(|i| if i < goals { TaxonomyLevel::LearningGoal } else { level_for(rng.random_range(0..3)) })
        .collect();
    levels.sort();
    let ids: Vec<NodeId> = (0..n).map(|i| id(&format!("n{i:02}"))).collect();
    let mut g = KnowledgeGraph::new();
    for (i, level) in levels.iter().enumerate() {
        let title = format!("node {i}");
        let description = format!("description of node {i} with words w{} w{}", i % 3, i % 5);
        g.add_node(LearningObjectNode::new(ids[i].as_str(), *level, &title, &description))
            .expect("fresh node");
    }
    for i in goals..n {
        let parents: Vec<usize> = (0..i).filter(|&p| levels[p] < levels[i]).collect();
        if !parents.is_empty() && rng.random_bool(0.85) {
            let p = parents[rng.random_range(0..parents.len())];
            g.add_edge(Edge::taxonomy(&ids[p], &ids[i])).expect("level-ordered edge");
        }
    }
    for i in goals..n {
        for j in i + 1..n {
            if rng.random_bool(link_prob) {
                let w = rng.random_range(1..=100) as f64 / 100.0;
                g.add_edge(Edge::semantic(&ids[i], &ids[j], w)).expect("fresh semantic edge");
            }
        }
    }
    g
}

/// Learning goals of a graph in id order.
pub fn goals(g: &KnowledgeGraph) -> Vec<NodeId> {
    g.nodes()
        .filter(|n| n.level == TaxonomyLevel::LearningGoal)
        .map(|n| n.id.clone())
        .collect()
}

/// Eight OERs in two weighted 4-cliques (`a*` and `b*`) joined by a single
/// weak bridge, under one goal and topic.
pub fn two_cliques() -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    g.add_node(LearningObjectNode::new("g", TaxonomyLevel::LearningGoal, "Goal", "goal")).unwrap();
    g.add_node(LearningObjectNode::new("t", TaxonomyLevel::Topic, "Topic", "topic")).unwrap();
    g.add_edge(Edge::taxonomy(&id("g"), &id("t"))).unwrap();
    let names = ["a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4"];
    for name in names {
        g.add_node(LearningObjectNode::new(name, TaxonomyLevel::Oer, &format!("Item {name}"), &format!("About {name}.")))
            .unwrap();
        g.add_edge(Edge::taxonomy(&id("t"), &id(name))).unwrap();
    }
    let weights = [0.9, 0.8, 0.7, 0.85, 0.75, 0.95];
    for side in [&names[..4], &names[4..]] {
        let mut k = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                g.add_edge(Edge::semantic(&id(side[i]), &id(side[j]), weights[k])).unwrap();
                k += 1;
            }
        }
    }
    g.add_edge(Edge::semantic(&id("a4"), &id("b1"), 0.4)).unwrap();
    g
}
