//! Rouge-1, Rouge-2, Rouge-L and Rouge-Lsum with recall, precision and F1.
//!
//! Texts are lowercased and split on non-alphanumeric runs; no stemming and
//! no stopword removal. Rouge-N uses clipped n-gram counts. Rouge-Lsum splits
//! both texts into sentences, takes for each reference sentence the union of
//! its LCS matches against every candidate sentence, and clips the hits by
//! the token counts of both texts.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{split_sentences, tokenize};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RougeError {
    #[error("reference has {found} tokens, need at least {needed}")]
    EmptyReference { found: usize, needed: usize },
    #[error("n must be at least 1")]
    InvalidN,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn from_counts(hits: usize, reference_total: usize, candidate_total: usize) -> Self {
        let ratio = |total: usize| if total == 0 { 0.0 } else { hits as f64 / total as f64 };
        Self::new(ratio(reference_total), ratio(candidate_total))
    }

    pub fn new(recall: f64, precision: f64) -> Self {
        let f1 = if recall + precision > 0.0 {
            2.0 * recall * precision / (recall + precision)
        } else {
            0.0
        };
        RougeScore {
            recall,
            precision,
            f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeReport {
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    #[serde(rename = "rougeL")]
    pub rouge_l: RougeScore,
    #[serde(rename = "rougeLsum")]
    pub rouge_lsum: RougeScore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RougeVariant {
    #[serde(rename = "rouge1")]
    Rouge1,
    #[serde(rename = "rouge2")]
    Rouge2,
    #[serde(rename = "rougeL")]
    RougeL,
    #[serde(rename = "rougeLsum")]
    RougeLsum,
}

impl RougeVariant {
    pub const ALL: [RougeVariant; 4] = [
        RougeVariant::Rouge1,
        RougeVariant::Rouge2,
        RougeVariant::RougeL,
        RougeVariant::RougeLsum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RougeVariant::Rouge1 => "rouge1",
            RougeVariant::Rouge2 => "rouge2",
            RougeVariant::RougeL => "rougeL",
            RougeVariant::RougeLsum => "rougeLsum",
        }
    }
}

impl RougeReport {
    pub fn get(&self, variant: RougeVariant) -> RougeScore {
        match variant {
            RougeVariant::Rouge1 => self.rouge1,
            RougeVariant::Rouge2 => self.rouge2,
            RougeVariant::RougeL => self.rouge_l,
            RougeVariant::RougeLsum => self.rouge_lsum,
        }
    }

    pub fn get_mut(&mut self, variant: RougeVariant) -> &mut RougeScore {
        match variant {
            RougeVariant::Rouge1 => &mut self.rouge1,
            RougeVariant::Rouge2 => &mut self.rouge2,
            RougeVariant::RougeL => &mut self.rouge_l,
            RougeVariant::RougeLsum => &mut self.rouge_lsum,
        }
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_default() += 1;
        }
    }
    counts
}

pub fn rouge_n(reference: &str, candidate: &str, n: usize) -> Result<RougeScore, RougeError> {
    if n == 0 {
        return Err(RougeError::InvalidN);
    }
    let ref_tokens = tokenize(reference);
    if ref_tokens.len() < n {
        return Err(RougeError::EmptyReference {
            found: ref_tokens.len(),
            needed: n,
        });
    }
    let cand_tokens = tokenize(candidate);
    let ref_counts = ngram_counts(&ref_tokens, n);
    let cand_counts = ngram_counts(&cand_tokens, n);
    let hits: usize = cand_counts
        .iter()
        .map(|(gram, c)| (*c).min(ref_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    let ref_total = ref_tokens.len() + 1 - n;
    let cand_total = (cand_tokens.len() + 1).saturating_sub(n);
    Ok(RougeScore::from_counts(hits, ref_total, cand_total))
}

/// Dynamic-programming LCS table; `t[i][j]` is the LCS length of
/// `a[..i]` and `b[..j]`.
fn lcs_table(a: &[String], b: &[String]) -> Vec<Vec<usize>> {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] {
                t[i - 1][j - 1] + 1
            } else {
                t[i - 1][j].max(t[i][j - 1])
            };
        }
    }
    t
}

/// Positions in `reference` of one longest common subsequence. Backtracks
/// from the end, preferring to drop a candidate token when both moves keep
/// the LCS length.
fn lcs_positions(reference: &[String], candidate: &[String]) -> Vec<usize> {
    let t = lcs_table(reference, candidate);
    let (mut i, mut j) = (reference.len(), candidate.len());
    let mut out = Vec::new();
    while i > 0 && j > 0 {
        if reference[i - 1] == candidate[j - 1] {
            out.push(i - 1);
            i -= 1;
            j -= 1;
        } else if t[i][j - 1] > t[i - 1][j] {
            j -= 1;
        } else {
            i -= 1;
        }
    }
    out.reverse();
    out
}

pub fn lcs_len(a: &[String], b: &[String]) -> usize {
    lcs_table(a, b)[a.len()][b.len()]
}

pub fn rouge_l(reference: &str, candidate: &str) -> Result<RougeScore, RougeError> {
    let ref_tokens = tokenize(reference);
    if ref_tokens.is_empty() {
        return Err(RougeError::EmptyReference { found: 0, needed: 1 });
    }
    let cand_tokens = tokenize(candidate);
    let l = lcs_len(&ref_tokens, &cand_tokens);
    Ok(RougeScore::from_counts(l, ref_tokens.len(), cand_tokens.len()))
}

pub fn rouge_lsum(reference: &str, candidate: &str) -> Result<RougeScore, RougeError> {
    let ref_sents: Vec<Vec<String>> = split_sentences(reference)
        .iter()
        .map(|s| tokenize(s))
        .filter(|t| !t.is_empty())
        .collect();
    let cand_sents: Vec<Vec<String>> = split_sentences(candidate)
        .iter()
        .map(|s| tokenize(s))
        .filter(|t| !t.is_empty())
        .collect();
    let ref_total: usize = ref_sents.iter().map(Vec::len).sum();
    if ref_total == 0 {
        return Err(RougeError::EmptyReference { found: 0, needed: 1 });
    }
    let cand_total: usize = cand_sents.iter().map(Vec::len).sum();

    let mut ref_left: HashMap<&str, usize> = HashMap::new();
    for t in ref_sents.iter().flatten() {
        *ref_left.entry(t.as_str()).or_default() += 1;
    }
    let mut cand_left: HashMap<&str, usize> = HashMap::new();
    for t in cand_sents.iter().flatten() {
        *cand_left.entry(t.as_str()).or_default() += 1;
    }

    let mut hits = 0;
    for r in &ref_sents {
        let union: BTreeSet<usize> = cand_sents
            .iter()
            .flat_map(|c| lcs_positions(r, c))
            .collect();
        for pos in union {
            let token = r[pos].as_str();
            let (Some(rl), Some(cl)) = (ref_left.get_mut(token), cand_left.get_mut(token)) else {
                continue;
            };
            if *rl > 0 && *cl > 0 {
                *rl -= 1;
                *cl -= 1;
                hits += 1;
            }
        }
    }
    Ok(RougeScore::from_counts(hits, ref_total, cand_total))
}

pub fn score_all(reference: &str, candidate: &str) -> Result<RougeReport, RougeError> {
    Ok(RougeReport {
        rouge1: rouge_n(reference, candidate, 1)?,
        rouge2: rouge_n(reference, candidate, 2)?,
        rouge_l: rouge_l(reference, candidate)?,
        rouge_lsum: rouge_lsum(reference, candidate)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(s: RougeScore, r: f64, p: f64, f: f64) {
        assert!((s.recall - r).abs() < 1e-9, "recall {s:?}");
        assert!((s.precision - p).abs() < 1e-9, "precision {s:?}");
        assert!((s.f1 - f).abs() < 1e-9, "f1 {s:?}");
    }

    #[test]
    fn cat_sat_unigrams_and_bigrams() {
        let r = "the cat sat on the mat";
        let c = "the cat sat";
        close(rouge_n(r, c, 1).unwrap(), 0.5, 1.0, 2.0 / 3.0);
        close(rouge_n(r, c, 2).unwrap(), 0.4, 1.0, 0.5714285714285715);
    }

    #[test]
    fn identity() {
        for n in 1..=3 {
            close(rouge_n("a b c d", "a b c d", n).unwrap(), 1.0, 1.0, 1.0);
        }
        close(rouge_l("x y", "x y").unwrap(), 1.0, 1.0, 1.0);
        close(rouge_lsum("One two. Three four!", "One two. Three four!").unwrap(), 1.0, 1.0, 1.0);
    }

    #[test]
    fn lcs_example() {
        close(rouge_l("alpha beta gamma delta", "alpha gamma beta delta").unwrap(), 0.75, 0.75, 0.75);
        close(rouge_l("alpha beta", "gamma delta").unwrap(), 0.0, 0.0, 0.0);
    }

    #[test]
    fn clipping() {
        // candidate repeats "the" four times; reference has it twice
        close(rouge_n("the cat and the dog", "the the the the", 1).unwrap(), 0.4, 0.5, 4.0 / 9.0);
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(rouge_n("", "x", 1), Err(RougeError::EmptyReference { found: 0, needed: 1 }));
        assert_eq!(rouge_n("one", "one", 2), Err(RougeError::EmptyReference { found: 1, needed: 2 }));
        assert_eq!(rouge_n("a b", "a b", 0), Err(RougeError::InvalidN));
        assert!(rouge_l(" ... ", "x").is_err());
        assert!(rouge_lsum("\n\n", "x").is_err());
        close(rouge_n("a b c", "a", 2).unwrap(), 0.0, 0.0, 0.0);
        close(rouge_l("a b c", "").unwrap(), 0.0, 0.0, 0.0);
        close(rouge_lsum("a b c", "").unwrap(), 0.0, 0.0, 0.0);
    }

    #[test]
    fn lsum_equals_l_for_single_sentences() {
        let r = "the quick brown fox jumps over the lazy dog";
        let c = "the lazy fox jumps over a brown dog quickly";
        assert_eq!(rouge_lsum(r, c).unwrap(), rouge_l(r, c).unwrap());
    }

    #[test]
    fn lsum_reordered_sentences_golden() {
        // Frozen from the reference `rouge-score` package (newline-split
        // sentences, no stemming).
        let r = "the quick brown fox jumps high\nthe lazy dog sleeps all day";
        let c = "the lazy dog sleeps in the sun\na quick brown fox jumps";
        close(rouge_lsum(r, c).unwrap(), 0.75, 0.75, 0.75);
        close(rouge_l(r, c).unwrap(), 0.4166666666666667, 0.4166666666666667, 0.4166666666666667);
        close(rouge_n(r, c, 2).unwrap(), 0.5454545454545454, 0.5454545454545454, 0.5454545454545454);
    }

    #[test]
    fn order_sensitivity_witness() {
        let r = "alpha beta gamma delta";
        let c = "delta gamma beta alpha";
        assert_eq!(rouge_n(r, c, 1).unwrap().recall, 1.0);
        assert_eq!(rouge_l(r, c).unwrap().recall, 0.25);
    }
}
