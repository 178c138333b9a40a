//! Paired evaluation of contextualized and plain explanations.
//!
//! Every learning object on every path becomes one sample. Both arms use
//! the same task body, template and word budget; only the KG context part
//! of the prompt differs. Each candidate is scored against a reference
//! built from the object's own description and reflection notes.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::{KgError, KnowledgeGraph, NodeId};
use crate::pipeline::{ExplainError, Explainer};
use crate::recommend::{recommend_path, validate_path, LearningPath, RecommendError, RecommenderConfig};
use crate::rouge::{score_all, RougeError, RougeReport, RougeScore, RougeVariant};
use crate::text::ensure_terminated;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} has no description to build a reference from")]
    EmptyMetadata(NodeId),
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error(transparent)]
    Rouge(#[from] RougeError),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("cannot parse report: {0}")]
    Parse(String),
}

impl From<KgError> for EvalError {
    fn from(err: KgError) -> Self {
        match err {
            KgError::UnknownNode(id) => EvalError::UnknownNode(id),
            other => EvalError::InvalidPath(other.to_string()),
        }
    }
}

/// Reference text: the node's description followed by its reflection
/// notes, each sentence-terminated.
pub fn build_reference(graph: &KnowledgeGraph, target: &NodeId) -> Result<String, EvalError> {
    let node = graph.node(target)?;
    let description = ensure_terminated(&node.description);
    if description.is_empty() {
        return Err(EvalError::EmptyMetadata(target.clone()));
    }
    let reflection = ensure_terminated(&node.reflection_info);
    Ok(if reflection.is_empty() {
        description
    } else {
        format!("{description} {reflection}")
    })
}

/// One line of a path list file: either a request resolved by the
/// recommender or an explicit step sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PathEntry {
    Explicit { steps: Vec<NodeId>, goal: NodeId },
    Request { start: NodeId, goal: NodeId },
}

/// Parses line-delimited path entries; blank and `#` lines are skipped.
pub fn parse_path_entries(text: &str) -> Result<Vec<PathEntry>, EvalError> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let entry = serde_json::from_str(line).map_err(|e| EvalError::Parse(format!("line {}: {e}", i + 1)))?;
        entries.push(entry);
    }
    Ok(entries)
}

/// Turns entries into scored paths. Explicit paths are validated and
/// scored; requests are answered by the recommender.
pub fn resolve_paths(
    graph: &KnowledgeGraph,
    entries: &[PathEntry],
    cfg: &RecommenderConfig,
) -> Result<Vec<LearningPath>, RecommendError> {
    entries
        .iter()
        .map(|entry| match entry {
            PathEntry::Request { start, goal } => recommend_path(graph, start, goal, cfg),
            PathEntry::Explicit { steps, goal } => {
                let mut path = LearningPath {
                    steps: steps.clone(),
                    goal: goal.clone(),
                    step_scores: Vec::new(),
                    score: 0.0,
                };
                let transitions = validate_path(graph, &path, cfg)?;
                path.step_scores = transitions.iter().map(|t| t.reward).collect();
                path.score = crate::recommend::path_score(&path.step_scores, cfg);
                Ok(path)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Worker threads; results do not depend on this.
    pub jobs: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { jobs: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmResult {
    /// User message sent to the backend (the task body).
    pub prompt_body: String,
    /// Generated slot content, one slot per line.
    pub candidate: String,
    pub slot_words: usize,
    pub scores: RougeReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub sample_id: String,
    pub target: NodeId,
    pub reference: String,
    pub with_context: ArmResult,
    pub without_context: ArmResult,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub sample_id: String,
    pub target: NodeId,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub scored: usize,
    pub with_context: RougeReport,
    pub without_context: RougeReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub samples: Vec<SampleResult>,
    pub failures: Vec<SampleFailure>,
    /// Means over scored samples; `None` when nothing was scored.
    pub aggregates: Option<Aggregates>,
}

impl EvalReport {
    pub fn from_parts(mut samples: Vec<SampleResult>, mut failures: Vec<SampleFailure>) -> Self {
        samples.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
        failures.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
        let aggregates = mean_reports(&samples);
        EvalReport {
            samples,
            failures,
            aggregates,
        }
    }
}

fn mean_reports(samples: &[SampleResult]) -> Option<Aggregates> {
    if samples.is_empty() {
        return None;
    }
    let n = samples.len() as f64;
    let mean = |pick: fn(&SampleResult) -> &RougeReport| {
        let mut out = RougeReport::default();
        for variant in RougeVariant::ALL {
            let (mut r, mut p, mut f) = (0.0, 0.0, 0.0);
            for s in samples {
                let score = pick(s).get(variant);
                r += score.recall;
                p += score.precision;
                f += score.f1;
            }
            *out.get_mut(variant) = RougeScore {
                recall: r / n,
                precision: p / n,
                f1: f / n,
            };
        }
        out
    };
    Some(Aggregates {
        scored: samples.len(),
        with_context: mean(|s| &s.with_context.scores),
        without_context: mean(|s| &s.without_context.scores),
    })
}

struct Job<'a> {
    sample_id: String,
    target: &'a NodeId,
    goal_title: Result<String, EvalError>,
}

fn run_arm(
    explainer: &Explainer<'_>,
    job: &Job<'_>,
    goal_title: &str,
    reference: &str,
    with_context: bool,
) -> Result<ArmResult, EvalError> {
    let outcome = explainer.explain(job.target, goal_title, with_context, Some(&job.sample_id))?;
    let candidate = outcome.explanation.slot_content();
    Ok(ArmResult {
        prompt_body: outcome.prompt.user_text(),
        slot_words: outcome.explanation.slot_word_count(),
        scores: score_all(reference, &candidate)?,
        candidate,
    })
}

fn run_sample(explainer: &Explainer<'_>, job: &Job<'_>) -> Result<SampleResult, EvalError> {
    let goal_title = job.goal_title.clone()?;
    let reference = build_reference(explainer.graph, job.target)?;
    let with_context = run_arm(explainer, job, &goal_title, &reference, true)?;
    let without_context = run_arm(explainer, job, &goal_title, &reference, false)?;
    Ok(SampleResult {
        sample_id: job.sample_id.clone(),
        target: job.target.clone(),
        reference,
        with_context,
        without_context,
    })
}

/// Runs both arms for every learning object on every path. Failed samples
/// are recorded and skipped; the report is sorted by sample id.
pub fn run_experiment(explainer: &Explainer<'_>, paths: &[LearningPath], cfg: &EvalConfig) -> EvalReport {
    let graph = explainer.graph;
    let mut jobs = Vec::new();
    for (pi, path) in paths.iter().enumerate() {
        let path_check = validate_path(graph, path, &RecommenderConfig::default())
            .map(|_| ())
            .map_err(|e| EvalError::InvalidPath(e.to_string()));
        let goal_title = path_check.and_then(|()| Ok(graph.node(&path.goal)?.title.clone()));
        for (si, step) in path.steps.iter().enumerate() {
            if graph.node(step).is_ok_and(|n| !n.level.is_learning_object()) {
                continue;
            }
            jobs.push(Job {
                sample_id: format!("p{pi:03}-s{si:02}-{step}"),
                target: step,
                goal_title: goal_title.clone(),
            });
        }
    }

    let run = || -> Vec<Result<SampleResult, SampleFailure>> {
        jobs.par_iter()
            .map(|job| {
                run_sample(explainer, job).map_err(|e| SampleFailure {
                    sample_id: job.sample_id.clone(),
                    target: job.target.clone(),
                    error: e.to_string(),
                })
            })
            .collect()
    };
    let results = match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };

    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(f) => failures.push(f),
        }
    }
    EvalReport::from_parts(samples, failures)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Table,
    Json,
}

pub fn export_report<W: Write>(report: &EvalReport, format: ExportFormat, mut out: W) -> Result<(), EvalError> {
    let text = match format {
        ExportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| EvalError::Io(e.to_string()))?;
            s.push('\n');
            s
        }
        ExportFormat::Table => render_table(report),
    };
    out.write_all(text.as_bytes()).map_err(|e| EvalError::Io(e.to_string()))
}

pub fn import_report(json: &str) -> Result<EvalReport, EvalError> {
    serde_json::from_str(json).map_err(|e| EvalError::Parse(e.to_string()))
}

/// Variant rows against arm columns, each with recall, precision and F1.
pub fn render_table(report: &EvalReport) -> String {
    let scored = report.aggregates.as_ref().map_or(0, |a| a.scored);
    let mut out = format!("scored samples: {scored}, failed samples: {}\n", report.failures.len());
    let _ = writeln!(
        out,
        "{:<10} | {:^28} | {:^28}",
        "variant", "with context", "without context"
    );
    let _ = writeln!(
        out,
        "{:<10} | {:>8} {:>9} {:>8}  | {:>8} {:>9} {:>8} ",
        "", "recall", "precision", "f1", "recall", "precision", "f1"
    );
    if let Some(agg) = &report.aggregates {
        for variant in RougeVariant::ALL {
            let w = agg.with_context.get(variant);
            let wo = agg.without_context.get(variant);
            let _ = writeln!(
                out,
                "{:<10} | {:>8.4} {:>9.4} {:>8.4}  | {:>8.4} {:>9.4} {:>8.4} ",
                variant.name(),
                w.recall,
                w.precision,
                w.f1,
                wo.recall,
                wo.precision,
                wo.f1
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{LearningObjectNode, TaxonomyLevel};

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    #[test]
    fn reference_building() {
        let mut g = KnowledgeGraph::new();
        g.add_node(LearningObjectNode::new("a", TaxonomyLevel::Oer, "A", "D.").with_reflection("R.")).unwrap();
        g.add_node(LearningObjectNode::new("b", TaxonomyLevel::Oer, "B", "Only description")).unwrap();
        g.add_node(LearningObjectNode::new("c", TaxonomyLevel::Oer, "C", "  ").with_reflection("R")).unwrap();
        assert_eq!(build_reference(&g, &id("a")).unwrap(), "D. R.");
        assert_eq!(build_reference(&g, &id("b")).unwrap(), "Only description.");
        assert_eq!(build_reference(&g, &id("c")), Err(EvalError::EmptyMetadata(id("c"))));
        assert_eq!(build_reference(&g, &id("z")), Err(EvalError::UnknownNode(id("z"))));
    }

    #[test]
    fn empty_report_table_has_headers_only() {
        let report = EvalReport::from_parts(vec![], vec![]);
        assert!(report.aggregates.is_none());
        let table = render_table(&report);
        assert_eq!(table.lines().count(), 3);
        assert!(table.contains("with context"));
        assert!(!table.contains("rouge1"));
    }
}
