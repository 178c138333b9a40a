//! Discovers `SemanticSimilar` edges between learning objects from their
//! textual properties.
//!
//! Documents are weighted with TF-IDF (log-scaled term frequency
//! `1 + ln(tf)`, smoothed inverse document frequency
//! `ln((1 + N) / (1 + df)) + 1`) and compared by cosine similarity. A
//! relation is added for every pair whose similarity is strictly above the
//! configured threshold.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::{Edge, KgError, KnowledgeGraph, LearningObjectNode, NodeId};
pub use crate::text::tokenize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractError {
    #[error("document {id} has {found} tokens, fewer than the required {required}")]
    EmptyDocument {
        id: NodeId,
        found: usize,
        required: usize,
    },
    #[error("document {0} is not part of the corpus")]
    NotInCorpus(NodeId),
    #[error("invalid similarity config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] KgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilarityConfig {
    pub threshold: f64,
    pub min_doc_tokens: usize,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            threshold: 0.35,
            min_doc_tokens: 3,
        }
    }
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<(), ExtractError> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(ExtractError::InvalidConfig(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        if self.min_doc_tokens == 0 {
            return Err(ExtractError::InvalidConfig("min_doc_tokens must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedDoc {
    pub source: NodeId,
    pub tokens: Vec<String>,
}

impl TokenizedDoc {
    pub fn new(source: NodeId, text: &str) -> Self {
        TokenizedDoc {
            source,
            tokens: tokenize(text),
        }
    }

    /// Title, description and keywords of a node.
    pub fn from_node(node: &LearningObjectNode) -> Self {
        let mut tokens = tokenize(&node.title);
        tokens.extend(tokenize(&node.description));
        for kw in &node.keywords {
            tokens.extend(tokenize(kw));
        }
        TokenizedDoc {
            source: node.id.clone(),
            tokens,
        }
    }
}

/// Document frequencies of a corpus; turns token lists into TF-IDF vectors.
#[derive(Debug, Clone)]
pub(crate) struct TfIdf {
    n_docs: f64,
    doc_freq: HashMap<String, usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct SparseVector {
    // sorted by term so that dot products sum in a fixed order
    weights: BTreeMap<String, f64>,
    norm_sq: f64,
}

impl TfIdf {
    pub(crate) fn fit<'a>(docs: impl IntoIterator<Item = &'a [String]>) -> Self {
        let mut n_docs = 0usize;
        let mut doc_freq: HashMap<String, usize> = HashMap::new();
        for tokens in docs {
            n_docs += 1;
            let mut seen: Vec<&String> = tokens.iter().collect();
            seen.sort_unstable();
            seen.dedup();
            for term in seen {
                *doc_freq.entry(term.clone()).or_default() += 1;
            }
        }
        TfIdf {
            n_docs: n_docs as f64,
            doc_freq,
        }
    }

    /// Terms unseen in the corpus get the maximum idf.
    pub(crate) fn vectorize(&self, tokens: &[String]) -> SparseVector {
        let mut tf: BTreeMap<String, usize> = BTreeMap::new();
        for t in tokens {
            *tf.entry(t.clone()).or_default() += 1;
        }
        let weights: BTreeMap<String, f64> = tf
            .into_iter()
            .map(|(term, count)| {
                let df = self.doc_freq.get(&term).copied().unwrap_or(0) as f64;
                let idf = ((1.0 + self.n_docs) / (1.0 + df)).ln() + 1.0;
                let w = (1.0 + (count as f64).ln()) * idf;
                (term, w)
            })
            .collect();
        let norm_sq = weights.values().map(|w| w * w).sum();
        SparseVector { weights, norm_sq }
    }
}

/// TF-IDF vectors for a fixed corpus of node documents.
#[derive(Debug, Clone)]
pub struct TfIdfModel {
    vectors: HashMap<NodeId, SparseVector>,
}

impl TfIdfModel {
    pub fn fit(corpus: &[TokenizedDoc]) -> Self {
        let tfidf = TfIdf::fit(corpus.iter().map(|d| d.tokens.as_slice()));
        let vectors = corpus
            .iter()
            .map(|doc| (doc.source.clone(), tfidf.vectorize(&doc.tokens)))
            .collect();
        TfIdfModel { vectors }
    }

    /// Cosine similarity in [0, 1]; symmetric bit for bit.
    pub fn similarity(&self, a: &NodeId, b: &NodeId) -> Result<f64, ExtractError> {
        let va = self.vectors.get(a).ok_or_else(|| ExtractError::NotInCorpus(a.clone()))?;
        let vb = self.vectors.get(b).ok_or_else(|| ExtractError::NotInCorpus(b.clone()))?;
        Ok(cosine(va, vb))
    }
}

pub(crate) fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    if a.norm_sq == 0.0 || b.norm_sq == 0.0 {
        return 0.0;
    }
    // Iterating the smaller map visits the shared terms in ascending order
    // either way, so the sum is independent of argument order.
    let (small, large) = if a.weights.len() <= b.weights.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .weights
        .iter()
        .filter_map(|(t, w)| large.weights.get(t).map(|v| w * v))
        .sum();
    (dot / (a.norm_sq * b.norm_sq).sqrt()).clamp(0.0, 1.0)
}

/// Similarity of two documents with respect to `corpus`.
pub fn similarity(
    a: &TokenizedDoc,
    b: &TokenizedDoc,
    corpus: &[TokenizedDoc],
    cfg: &SimilarityConfig,
) -> Result<f64, ExtractError> {
    for doc in [a, b] {
        if doc.tokens.len() < cfg.min_doc_tokens {
            return Err(ExtractError::EmptyDocument {
                id: doc.source.clone(),
                found: doc.tokens.len(),
                required: cfg.min_doc_tokens,
            });
        }
        if !corpus.iter().any(|d| d.source == doc.source) {
            return Err(ExtractError::NotInCorpus(doc.source.clone()));
        }
    }
    TfIdfModel::fit(corpus).similarity(&a.source, &b.source)
}

#[derive(Debug, Clone)]
pub struct ExtractionOutcome {
    pub graph: KnowledgeGraph,
    pub added: usize,
    /// Learning objects left out of the comparison, with the reason.
    pub skipped: Vec<ExtractError>,
}

/// Adds a semantic edge for every unordered pair of learning objects whose
/// similarity exceeds `cfg.threshold`. Pairs already linked semantically are
/// left alone. Documents shorter than `cfg.min_doc_tokens` are skipped and
/// reported; the IDF corpus consists of the remaining documents.
pub fn extract_relations(
    graph: &KnowledgeGraph,
    cfg: &SimilarityConfig,
) -> Result<ExtractionOutcome, ExtractError> {
    cfg.validate()?;
    let mut corpus = Vec::new();
    let mut skipped = Vec::new();
    for node in graph.learning_objects() {
        let doc = TokenizedDoc::from_node(node);
        if doc.tokens.len() < cfg.min_doc_tokens {
            skipped.push(ExtractError::EmptyDocument {
                id: doc.source,
                found: doc.tokens.len(),
                required: cfg.min_doc_tokens,
            });
        } else {
            corpus.push(doc);
        }
    }
    let model = TfIdfModel::fit(&corpus);
    let ids: Vec<&NodeId> = corpus.iter().map(|d| &d.source).collect();

    let found: Vec<(usize, usize, f64)> = (0..ids.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let model = &model;
            let ids = &ids;
            (i + 1..ids.len()).filter_map(move |j| {
                let sim = cosine(&model.vectors[ids[i]], &model.vectors[ids[j]]);
                (sim > cfg.threshold).then_some((i, j, sim))
            })
        })
        .collect();

    let mut out = graph.clone();
    let mut added = 0;
    for (i, j, sim) in found {
        if out.semantic_weight(ids[i], ids[j]).is_some() {
            continue;
        }
        out.add_edge(Edge::semantic(ids[i], ids[j], sim))?;
        added += 1;
    }
    Ok(ExtractionOutcome {
        graph: out,
        added,
        skipped,
    })
}
