//! Deterministic offline backend.
//!
//! With KG context in the system text, each slot is answered extractively:
//! context sentences (hierarchy, related, supporting) are ranked by TF-IDF
//! similarity to the slot's task statement and taken in rank order until the
//! slot budget is met, preferring sentences not used by an earlier slot.
//! Without context, or once the context runs dry, answers are padded with
//! generic phrases from [`FILLER_PHRASES`], starting at an offset derived
//! from a stable hash of the prompt.

use super::{GatewayError, GenerationRequest, GenerationResult, TextBackend};
use crate::context::SectionLabel;
use crate::prompt::{format_slot_blocks, CONTEXT_HEADER, TASK_PREFIX};
use crate::relations::{cosine, TfIdf};
use crate::text::{split_sentences, tokenize, word_count};

/// Generic encouragement with no subject-matter vocabulary.
pub const FILLER_PHRASES: [&str; 16] = [
    "Every journey begins bravely.",
    "Curiosity sparks lasting passion.",
    "Patience turns habits into milestones.",
    "Celebrate small wins often.",
    "Positive mindsets overcome hurdles.",
    "Persistence fuels lifelong growth.",
    "Dream big, stay focused.",
    "Friendly peers make studying enjoyable.",
    "Believe yourself wholeheartedly.",
    "Inspiring stories encourage everyone.",
    "Motivation grows through encouragement.",
    "Wonderful things happen eventually.",
    "Enjoy every exciting adventure.",
    "Confidence blossoms gradually.",
    "Stay hopeful, keep going.",
    "Effort always pays off.",
];

#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    id: String,
}

impl MockBackend {
    pub fn new() -> Self {
        MockBackend { id: "mock".into() }
    }
}

#[derive(Debug, PartialEq)]
pub(crate) struct ParsedTask {
    pub slot: String,
    pub budget: usize,
    pub statement: String,
}

/// Reads `TASK <slot> (max <n> words): <statement>` lines.
pub(crate) fn parse_tasks(user_text: &str) -> Result<Vec<ParsedTask>, GatewayError> {
    let mut tasks = Vec::new();
    for line in user_text.lines() {
        let Some(rest) = line.strip_prefix(TASK_PREFIX) else { continue };
        let malformed = || GatewayError::MalformedPrompt(format!("cannot parse task line {line:?}"));
        let (slot, rest) = rest.split_once(" (max ").ok_or_else(malformed)?;
        let (budget, statement) = rest.split_once(" words): ").ok_or_else(malformed)?;
        let budget: usize = budget.parse().map_err(|_| malformed())?;
        tasks.push(ParsedTask {
            slot: slot.to_string(),
            budget,
            statement: statement.to_string(),
        });
    }
    if tasks.is_empty() {
        return Err(GatewayError::MalformedPrompt("no task lines".into()));
    }
    Ok(tasks)
}

/// Distinct sentences of the HIERARCHY, RELATED and SUPPORTING sections, in
/// order of first appearance. `None` when the prompt carries no context part.
pub(crate) fn context_sentences(system_text: &str) -> Option<Vec<String>> {
    let mut lines = system_text.lines().skip_while(|l| *l != CONTEXT_HEADER);
    lines.next()?;
    let usable = [SectionLabel::Hierarchy, SectionLabel::Related, SectionLabel::Supporting];
    let mut current: Option<SectionLabel> = None;
    let mut sentences = Vec::new();
    for line in lines {
        if let Some(label) = SectionLabel::ALL.into_iter().find(|l| line == l.marker()) {
            current = Some(label);
            continue;
        }
        if current.is_some_and(|c| usable.contains(&c)) {
            let line = line.trim_start_matches("- ");
            for sentence in split_sentences(line) {
                if !sentences.contains(&sentence) {
                    sentences.push(sentence);
                }
            }
        }
    }
    Some(sentences)
}

struct Filler {
    cursor: usize,
}

impl Filler {
    fn next(&mut self) -> &'static str {
        let phrase = FILLER_PHRASES[self.cursor % FILLER_PHRASES.len()];
        self.cursor += 1;
        phrase
    }
}

/// Start offset into the filler list for a prompt.
pub(crate) fn filler_offset(request: &GenerationRequest) -> usize {
    (request.prompt_hash() % FILLER_PHRASES.len() as u64) as usize
}

impl TextBackend for MockBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult, GatewayError> {
        let tasks = parse_tasks(&request.user_text)?;
        let sentences = context_sentences(&request.system_text).unwrap_or_default();
        let tfidf = TfIdf::fit(
            sentences
                .iter()
                .map(|s| tokenize(s))
                .collect::<Vec<_>>()
                .iter()
                .map(Vec::as_slice),
        );
        let vectors: Vec<_> = sentences.iter().map(|s| tfidf.vectorize(&tokenize(s))).collect();
        let mut used = vec![false; sentences.len()];
        let mut filler = Filler {
            cursor: filler_offset(request),
        };

        let mut answers = Vec::with_capacity(tasks.len());
        for task in &tasks {
            let query = tfidf.vectorize(&tokenize(&task.statement));
            let mut ranked: Vec<(usize, f64)> = vectors
                .iter()
                .enumerate()
                .map(|(i, v)| (i, cosine(&query, v)))
                .collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            // unused sentences first, then ones already given to another slot
            let order = ranked
                .iter()
                .filter(|(i, _)| !used[*i])
                .chain(ranked.iter().filter(|(i, _)| used[*i]))
                .map(|(i, _)| *i)
                .collect::<Vec<_>>();

            let mut parts: Vec<&str> = Vec::new();
            let mut words = 0;
            for i in order {
                if words >= task.budget {
                    break;
                }
                parts.push(&sentences[i]);
                words += word_count(&sentences[i]);
                used[i] = true;
            }
            while words < task.budget {
                let phrase = filler.next();
                parts.push(phrase);
                words += word_count(phrase);
            }
            answers.push((task.slot.as_str(), parts.join(" ")));
        }
        let text = format_slot_blocks(answers.iter().map(|(s, t)| (*s, t.as_str())));
        Ok(GenerationResult {
            text,
            backend_id: self.id.clone(),
            latency_ms: 0,
        })
    }
}
