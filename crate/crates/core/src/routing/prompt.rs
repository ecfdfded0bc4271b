//! Routing prompt templates and rendering.
//!
//! Templates carry two placeholders, `{original_question}` and
//! `{retrieved_examples}`, and are filled in a single pass so that text
//! inside the query can never be re-interpreted as a placeholder.

use std::borrow::Cow;
use std::path::Path;

use super::{RoutingError, Strategy};
use crate::memory::ExperienceRecord;
use crate::retrieval::RetrievedCase;

pub const ORIGINAL_QUESTION: &str = "original_question";
pub const RETRIEVED_EXAMPLES: &str = "retrieved_examples";
/// Inserted in place of the examples when retrieval came back empty.
pub const NO_SIMILAR_QUESTIONS: &str = "No similar questions found";
pub const TRUNCATION_MARKER: char = '…';

const PROMPT_ONLY: &str = include_str!("../../templates/prompt_only.txt");
const RAG_DIRECT: &str = include_str!("../../templates/rag_direct.txt");
const REGULAR_COT: &str = include_str!("../../templates/regular_cot.txt");
const RUBRIC_COT: &str = include_str!("../../templates/rubric_cot.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    prompt_only: String,
    rag_direct: String,
    regular_cot: String,
    rubric_cot: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self::builtin()
    }
}

impl PromptTemplates {
    pub fn builtin() -> Self {
        PromptTemplates {
            prompt_only: PROMPT_ONLY.to_string(),
            rag_direct: RAG_DIRECT.to_string(),
            regular_cot: REGULAR_COT.to_string(),
            rubric_cot: RUBRIC_COT.to_string(),
        }
    }

    /// Loads `prompt_only.txt`, `rag_direct.txt`, `regular_cot.txt` and
    /// `rubric_cot.txt` from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, RoutingError> {
        let dir = dir.as_ref();
        let read = |strategy: Strategy| {
            let path = dir.join(strategy.template_file());
            std::fs::read_to_string(&path).map_err(|_| RoutingError::TemplateMissing {
                strategy,
                path: path.display().to_string(),
            })
        };
        let templates = PromptTemplates {
            prompt_only: read(Strategy::PromptOnly)?,
            rag_direct: read(Strategy::RagDirect)?,
            regular_cot: read(Strategy::RegularCot)?,
            rubric_cot: read(Strategy::RubricCot)?,
        };
        templates.validate()?;
        Ok(templates)
    }

    pub fn get(&self, strategy: Strategy) -> &str {
        match strategy {
            Strategy::PromptOnly => &self.prompt_only,
            Strategy::RagDirect => &self.rag_direct,
            Strategy::RegularCot => &self.regular_cot,
            Strategy::RubricCot => &self.rubric_cot,
        }
    }

    pub fn validate(&self) -> Result<(), RoutingError> {
        for strategy in Strategy::ALL {
            let template = self.get(strategy);
            let mut required = vec![ORIGINAL_QUESTION];
            if strategy.uses_retrieval() {
                required.push(RETRIEVED_EXAMPLES);
            }
            for name in required {
                if !template.contains(&format!("{{{name}}}")) {
                    return Err(RoutingError::TemplateInvalid {
                        strategy,
                        reason: format!("missing placeholder {{{name}}}"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Caps an answer at `max_chars` characters, marking the cut with `…`.
pub fn truncate_answer(text: &str, max_chars: usize) -> Cow<'_, str> {
    match text.char_indices().nth(max_chars) {
        None => Cow::Borrowed(text),
        Some((cut, _)) => {
            let mut s = String::with_capacity(cut + TRUNCATION_MARKER.len_utf8());
            s.push_str(&text[..cut]);
            s.push(TRUNCATION_MARKER);
            Cow::Owned(s)
        }
    }
}

/// One retrieved case as shown to the routing model.
pub fn format_example(rank: usize, record: &ExperienceRecord, truncate_chars: usize) -> String {
    format!(
        "Example {rank}:\n\
         Question: {question}\n\
         LLM answer: {llm}\n\
         LLM response time: {t_llm:.1} s\n\
         Agent answer: {agent}\n\
         Agent response time: {t_agent:.1} s",
        question = record.question,
        llm = truncate_answer(&record.llm_answer, truncate_chars),
        t_llm = record.llm_latency_s,
        agent = truncate_answer(&record.agent_answer, truncate_chars),
        t_agent = record.agent_latency_s,
    )
}

/// Example blocks ordered by rank, or the no-results sentence.
pub fn format_examples(retrieved: &[(RetrievedCase, &ExperienceRecord)], truncate_chars: usize) -> String {
    if retrieved.is_empty() {
        return NO_SIMILAR_QUESTIONS.to_string();
    }
    let mut ordered: Vec<_> = retrieved.iter().collect();
    ordered.sort_by_key(|(case, _)| case.rank);
    ordered
        .iter()
        .map(|(case, record)| format_example(case.rank, record, truncate_chars))
        .collect::<Vec<_>>()
        .join("\n\n")
}

pub fn render_prompt(
    templates: &PromptTemplates,
    strategy: Strategy,
    query: &str,
    retrieved: &[(RetrievedCase, &ExperienceRecord)],
    truncate_chars: usize,
) -> Result<String, RoutingError> {
    if !strategy.uses_retrieval() && !retrieved.is_empty() {
        return Err(RoutingError::UnexpectedExamples);
    }
    let examples = strategy.uses_retrieval().then(|| format_examples(retrieved, truncate_chars));
    fill(templates.get(strategy), query, examples.as_deref())
}

fn fill(template: &str, query: &str, examples: Option<&str>) -> Result<String, RoutingError> {
    let mut out = String::with_capacity(template.len() + query.len() + examples.map_or(0, str::len));
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let name_len = after.find(|c: char| !(c.is_ascii_lowercase() || c == '_')).unwrap_or(after.len());
        if name_len == 0 || !after[name_len..].starts_with('}') {
            out.push('{');
            rest = after;
            continue;
        }
        let name = &after[..name_len];
        match (name, examples) {
            (ORIGINAL_QUESTION, _) => out.push_str(query),
            (RETRIEVED_EXAMPLES, Some(ex)) => out.push_str(ex),
            _ => return Err(RoutingError::PlaceholderUnfilled(name.to_string())),
        }
        rest = &after[name_len + 1..];
    }
    out.push_str(rest);
    Ok(out)
}
