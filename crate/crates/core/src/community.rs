//! Communities of densely connected learning objects in the semantic
//! subgraph.
//!
//! Greedy agglomerative modularity maximization: start from singletons and
//! repeatedly merge the pair of communities with the largest modularity
//! gain until no merge has a positive gain. Equal gains are broken by the
//! smallest member ids of the two communities. Taxonomy edges and learning
//! goals do not take part.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::kg::{KgError, KnowledgeGraph, NodeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityAssignment {
    /// Community index per learning object; indices are dense from 0 and
    /// numbered by the smallest member id.
    pub partition: BTreeMap<NodeId, usize>,
    pub modularity: f64,
}

impl CommunityAssignment {
    pub fn community_count(&self) -> usize {
        self.partition.values().max().map_or(0, |m| m + 1)
    }

    pub fn community_index(&self, id: &NodeId) -> Option<usize> {
        self.partition.get(id).copied()
    }

    /// Members of the community containing `id`, ascending by id.
    pub fn community_of(&self, id: &NodeId) -> Result<Vec<NodeId>, KgError> {
        let idx = self
            .partition
            .get(id)
            .ok_or_else(|| KgError::UnknownNode(id.clone()))?;
        Ok(self
            .partition
            .iter()
            .filter(|(_, c)| *c == idx)
            .map(|(n, _)| n.clone())
            .collect())
    }

    /// All communities, each ascending by id, ordered by index.
    pub fn communities(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (id, c) in &self.partition {
            out[*c].push(id.clone());
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("assignment serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Weighted undirected graph over learning objects, indexed densely.
struct WeightedGraph {
    ids: Vec<NodeId>,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    fn semantic_subgraph(graph: &KnowledgeGraph) -> Self {
        let ids: Vec<NodeId> = graph.learning_objects().map(|n| n.id.clone()).collect();
        let index: HashMap<&NodeId, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let mut edges = Vec::new();
        for e in graph.edges() {
            if let Some(w) = e.kind.weight() {
                if let (Some(&a), Some(&b)) = (index.get(&e.head), index.get(&e.tail)) {
                    edges.push((a, b, w));
                }
            }
        }
        WeightedGraph { ids, edges }
    }

    fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }
}

/// Weighted modularity of `labels` (one label per node index).
fn modularity_of(g: &WeightedGraph, labels: &[usize]) -> f64 {
    let m = g.total_weight();
    if m == 0.0 {
        return 0.0;
    }
    let k = labels.iter().max().map_or(0, |x| x + 1);
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for &(a, b, w) in &g.edges {
        degree[labels[a]] += w;
        degree[labels[b]] += w;
        if labels[a] == labels[b] {
            internal[labels[a]] += w;
        }
    }
    (0..k)
        .map(|c| internal[c] / m - (degree[c] / (2.0 * m)).powi(2))
        .sum()
}

/// Modularity of an arbitrary assignment over the semantic subgraph of
/// `graph`. Learning objects missing from `partition` count as singletons.
pub fn modularity(graph: &KnowledgeGraph, partition: &BTreeMap<NodeId, usize>) -> f64 {
    let g = WeightedGraph::semantic_subgraph(graph);
    let mut next = partition.values().max().map_or(0, |m| m + 1);
    let labels: Vec<usize> = g
        .ids
        .iter()
        .map(|id| {
            partition.get(id).copied().unwrap_or_else(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    modularity_of(&g, &labels)
}

struct Community {
    // smallest member index; ids are sorted so this is also the smallest id
    min_member: usize,
    members: Vec<usize>,
    degree: f64,
}

pub fn detect_communities(graph: &KnowledgeGraph) -> CommunityAssignment {
    let g = WeightedGraph::semantic_subgraph(graph);
    let n = g.ids.len();
    let m = g.total_weight();

    let mut comms: Vec<Option<Community>> = (0..n)
        .map(|i| {
            Some(Community {
                min_member: i,
                members: vec![i],
                degree: 0.0,
            })
        })
        .collect();
    // between[a][b] = total edge weight between communities a and b (a != b)
    let mut between: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for &(a, b, w) in &g.edges {
        comms[a].as_mut().unwrap().degree += w;
        comms[b].as_mut().unwrap().degree += w;
        *between[a].entry(b).or_default() += w;
        *between[b].entry(a).or_default() += w;
    }

    if m > 0.0 {
        loop {
            let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
            for (a, links) in between.iter().enumerate() {
                let Some(ca) = &comms[a] else { continue };
                for (&b, &w_ab) in links.range(a + 1..) {
                    let cb = comms[b].as_ref().expect("live community");
                    let gain = w_ab / m - ca.degree * cb.degree / (2.0 * m * m);
                    if gain <= 0.0 {
                        continue;
                    }
                    let key = if ca.min_member < cb.min_member {
                        (ca.min_member, cb.min_member)
                    } else {
                        (cb.min_member, ca.min_member)
                    };
                    let better = match &best {
                        None => true,
                        Some((g0, k0, _, _)) => gain > *g0 || (gain == *g0 && key < *k0),
                    };
                    if better {
                        best = Some((gain, key, a, b));
                    }
                }
            }
            let Some((_, _, a, b)) = best else { break };
            merge(&mut comms, &mut between, a, b);
        }
    }

    let mut live: Vec<&Community> = comms.iter().flatten().collect();
    live.sort_by_key(|c| c.min_member);
    let mut labels = vec![0; n];
    for (idx, c) in live.iter().enumerate() {
        for &member in &c.members {
            labels[member] = idx;
        }
    }
    let modularity = modularity_of(&g, &labels);
    let partition = g.ids.iter().cloned().zip(labels).collect();
    CommunityAssignment {
        partition,
        modularity,
    }
}

/// Merges community `b` into `a` (a < b).
fn merge(comms: &mut [Option<Community>], between: &mut [BTreeMap<usize, f64>], a: usize, b: usize) {
    let cb = comms[b].take().expect("live community");
    let ca = comms[a].as_mut().expect("live community");
    ca.members.extend(cb.members);
    ca.members.sort_unstable();
    ca.min_member = ca.min_member.min(cb.min_member);
    ca.degree += cb.degree;

    let links_b = std::mem::take(&mut between[b]);
    between[a].remove(&b);
    for (c, w) in links_b {
        between[c].remove(&b);
        if c == a {
            continue;
        }
        *between[a].entry(c).or_default() += w;
        *between[c].entry(a).or_default() += w;
    }
}
