//! Modularity by direct summation and exhaustive partition search.

use std::collections::BTreeMap;

use kgexplain_core::kg::{KnowledgeGraph, NodeId, RelationKind};

/// Learning objects and semantic edges as an index-based weighted graph.
pub fn semantic_subgraph(g: &KnowledgeGraph) -> (Vec<NodeId>, Vec<(usize, usize, f64)>) {
    let nodes: Vec<NodeId> = g.nodes().filter(|n| n.level.is_learning_object()).map(|n| n.id.clone()).collect();
    let pos = |id: &NodeId| nodes.iter().position(|n| n == id).expect("semantic endpoints are learning objects");
    let edges = g
        .edges()
        .iter()
        .filter_map(|e| match e.kind {
            RelationKind::SemanticSimilar(w) => Some((pos(&e.head), pos(&e.tail), w)),
            RelationKind::TaxonomyChild => None,
        })
        .collect();
    (nodes, edges)
}

/// `Q = 1/(2m) * sum_ij [A_ij - k_i k_j / (2m)] * [c_i == c_j]`; zero for
/// graphs without edges.
pub fn modularity(n: usize, edges: &[(usize, usize, f64)], labels: &[usize]) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j, w) in edges {
        a[i][j] += w;
        a[j][i] += w;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Every set partition of `n` items as restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for label in 0..=next {
            prefix.push(label);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

/// All partitions attaining the maximum modularity (within `eps`), keyed
/// by node id, plus that maximum and the number of partitions searched.
/// Nodes without semantic edges do not affect modularity and are kept as
/// singletons; only the remaining nodes are enumerated.
pub fn best_partitions(g: &KnowledgeGraph, eps: f64) -> (f64, Vec<BTreeMap<NodeId, usize>>, usize) {
    let (nodes, edges) = semantic_subgraph(g);
    let linked: Vec<usize> = (0..nodes.len())
        .filter(|i| edges.iter().any(|(a, b, _)| a == i || b == i))
        .collect();
    let parts = all_partitions(linked.len());
    let expand = |p: &[usize]| -> Vec<usize> {
        let mut labels: Vec<usize> = (0..nodes.len()).map(|i| linked.len() + i).collect();
        for (k, &i) in linked.iter().enumerate() {
            labels[i] = p[k];
        }
        labels
    };
    let scores: Vec<f64> = parts.iter().map(|p| modularity(nodes.len(), &edges, &expand(p))).collect();
    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let winners = parts
        .iter()
        .zip(&scores)
        .filter(|(_, s)| best - **s <= eps)
        .map(|(p, _)| nodes.iter().cloned().zip(expand(p)).collect())
        .collect();
    (best, winners, parts.len())
}

/// Canonical form: communities as sorted member lists, sorted.
pub fn canonical(partition: &BTreeMap<NodeId, usize>) -> Vec<Vec<NodeId>> {
    let mut groups: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for (id, c) in partition {
        groups.entry(*c).or_default().push(id.clone());
    }
    let mut out: Vec<Vec<NodeId>> = groups.into_values().collect();
    out.sort();
    out
}
