//! Knowledge-graph grounded explanations for learning-path recommendations.
//!
//! A curriculum taxonomy is enriched with similarity relations, partitioned
//! into communities and searched for goal-directed learning paths. For a
//! recommended learning object, the surrounding graph is condensed into a
//! context text that grounds an explanation generated from a fixed template.
//! An evaluation harness compares explanations generated with and without
//! that context against reference texts using Rouge scores.

pub mod community;
pub mod config;
pub mod context;
pub mod eval;
pub mod gateway;
pub mod kg;
pub mod pipeline;
pub mod prompt;
pub mod recommend;
pub mod relations;
pub mod rouge;
pub mod synthetic;
pub mod text;

pub use community::{detect_communities, modularity, CommunityAssignment};
pub use config::{AppConfig, BackendConfig, BackendKind, ConfigError};
pub use context::{assemble, render, ContextBundle, ContextLimits, ContextText};
pub use eval::{build_reference, export_report, run_experiment, EvalConfig, EvalError, EvalReport, ExportFormat};
pub use gateway::{Gateway, GatewayError, GenerationRequest, GenerationResult, MockBackend, TextBackend};
pub use kg::{Edge, KgError, KnowledgeGraph, LearningObjectNode, NodeId, RelationKind, TaxonomyLevel};
pub use pipeline::{ExplainError, ExplainOutcome, ExplainSettings, Explainer};
pub use prompt::{build_prompt, fill_template, Explanation, ExplanationTemplate, PromptDocument};
pub use recommend::{path_rationale, recommend_path, LearningPath, RecommendError, RecommenderConfig};
pub use relations::{extract_relations, similarity, SimilarityConfig};
pub use rouge::{rouge_l, rouge_lsum, rouge_n, score_all, RougeReport, RougeScore, RougeVariant};
