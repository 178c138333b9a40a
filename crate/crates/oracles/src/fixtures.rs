//! Values computed outside Rust and frozen as JSON.
//!
//! `rouge_score_pairs.json` holds scores from the reference Python
//! `rouge-score` package (no stemming) on 50 seeded random text pairs.
//! `tfidf_five.json` holds cosine similarities for a five-document corpus
//! from a standalone Python TF-IDF script using the same weighting.

use serde::Deserialize;

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct FrozenScore {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct FrozenRouge {
    pub rouge1: FrozenScore,
    pub rouge2: FrozenScore,
    #[serde(rename = "rougeL")]
    pub rouge_l: FrozenScore,
    #[serde(rename = "rougeLsum")]
    pub rouge_lsum: FrozenScore,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RougeCase {
    pub reference: String,
    pub candidate: String,
    pub scores: FrozenRouge,
}

pub fn rouge_score_pairs() -> Vec<RougeCase> {
    serde_json::from_str(include_str!("../fixtures/rouge_score_pairs.json")).expect("fixture parses")
}

#[derive(Debug, Clone, Deserialize)]
pub struct TfidfDocument {
    pub id: String,
    pub title: String,
    pub description: String,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TfidfFixture {
    pub documents: Vec<TfidfDocument>,
    /// `(a, b, cosine)` for every unordered pair.
    pub similarities: Vec<(String, String, f64)>,
    /// Threshold (as written) to the pairs strictly above it.
    pub edges_above: std::collections::BTreeMap<String, Vec<(String, String)>>,
}

pub fn tfidf_five() -> TfidfFixture {
    serde_json::from_str(include_str!("../fixtures/tfidf_five.json")).expect("fixture parses")
}
