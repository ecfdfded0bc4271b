//! Route(x) ∈ {LLM, Agent}: retrieve early experience, render a
//! strategy-specific prompt, ask the routing model, parse its answer.
//!
//! The router is total: when the model's output cannot be parsed (after the
//! configured re-prompts) the configured fallback route is returned with
//! `fallback_used = true`. Only transport-level failure of the routing
//! backend surfaces as an error.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::memory::{ExperienceRecord, Memory};
use crate::retrieval::{Index, RetrievalError, RetrievedCase};
use crate::route::Route;
use crate::solvers::{BackendError, ChatBackend};
use crate::Execution;

pub mod parse;
pub mod prompt;

pub use parse::{parse_decision, ParseFailure};
pub use prompt::{render_prompt, PromptTemplates, NO_SIMILAR_QUESTIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Capability profiles only; no memory.
    PromptOnly,
    /// Retrieved cases, direct YES/NO.
    RagDirect,
    /// Retrieved cases, free-form step-by-step reasoning.
    RegularCot,
    /// Retrieved cases, fixed decision rubric.
    #[default]
    RubricCot,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::PromptOnly, Strategy::RagDirect, Strategy::RegularCot, Strategy::RubricCot];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::PromptOnly => "prompt_only",
            Strategy::RagDirect => "rag_direct",
            Strategy::RegularCot => "regular_cot",
            Strategy::RubricCot => "rubric_cot",
        }
    }

    pub fn uses_retrieval(self) -> bool {
        self != Strategy::PromptOnly
    }

    pub fn template_file(self) -> String {
        format!("{}.txt", self.as_str())
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = RoutingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s.trim())
            .ok_or_else(|| RoutingError::UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RoutingError {
    #[error("strategy {0} needs a memory index, but none is loaded")]
    IndexMissing(Strategy),
    #[error("routing backend unavailable: {0}")]
    BackendUnavailable(BackendError),
    #[error("no template for {strategy} at {path}")]
    TemplateMissing { strategy: Strategy, path: String },
    #[error("template for {strategy} is invalid: {reason}")]
    TemplateInvalid { strategy: Strategy, reason: String },
    #[error("placeholder {{{0}}} has no value")]
    PlaceholderUnfilled(String),
    #[error("prompt_only does not take retrieved examples")]
    UnexpectedExamples,
    #[error("retrieved record '{0}' is not in the memory")]
    IndexMismatch(String),
    #[error("unknown strategy '{0}' (expected prompt_only, rag_direct, regular_cot or rubric_cot)")]
    UnknownStrategy(String),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

/// Router output plus audit trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingDecision {
    pub route: Route,
    pub strategy: Strategy,
    /// Last completion received from the routing model.
    pub rationale: String,
    pub retrieved: Vec<RetrievedCase>,
    pub router_latency_s: f64,
    pub fallback_used: bool,
}

impl RoutingDecision {
    pub fn retrieved_ids(&self) -> Vec<&str> {
        self.retrieved.iter().map(|c| c.id.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouterSettings {
    pub strategy: Strategy,
    pub k: usize,
    pub fallback_route: Route,
    /// Extra prompts sent after an unparseable completion.
    pub parse_retries: u32,
    pub example_truncate_chars: usize,
    pub templates: PromptTemplates,
}

impl Default for RouterSettings {
    fn default() -> Self {
        RouterSettings {
            strategy: Strategy::RubricCot,
            k: 5,
            fallback_route: Route::Agent,
            parse_retries: 1,
            example_truncate_chars: 1000,
            templates: PromptTemplates::builtin(),
        }
    }
}

/// Decides a route for one query.
pub fn decide_route(
    query: &str,
    strategy: Strategy,
    index: Option<&Index>,
    memory: Option<&Memory>,
    backend: &dyn ChatBackend,
    settings: &RouterSettings,
) -> Result<RoutingDecision, RoutingError> {
    let start = Instant::now();
    let mut retrieved: Vec<RetrievedCase> = Vec::new();
    let mut records: Vec<&ExperienceRecord> = Vec::new();
    if strategy.uses_retrieval() {
        let (Some(index), Some(memory)) = (index, memory) else {
            return Err(RoutingError::IndexMissing(strategy));
        };
        // Parallelism is spent across queries, not inside one retrieval.
        retrieved = index.retrieve(query, settings.k, index.config().alpha, Execution::Sequential)?;
        for case in &retrieved {
            records.push(memory.get(&case.id).ok_or_else(|| RoutingError::IndexMismatch(case.id.clone()))?);
        }
    }
    let pairs: Vec<(RetrievedCase, &ExperienceRecord)> = retrieved.iter().cloned().zip(records.iter().copied()).collect();
    let prompt = render_prompt(&settings.templates, strategy, query, &pairs, settings.example_truncate_chars)?;

    let mut rationale = String::new();
    let mut route = None;
    for attempt in 0..=settings.parse_retries {
        rationale = backend.complete(&prompt).map_err(RoutingError::BackendUnavailable)?;
        match parse_decision(&rationale, strategy) {
            Ok(r) => {
                route = Some(r);
                break;
            }
            Err(_) => tracing::debug!(attempt, "unparseable routing completion"),
        }
    }
    let fallback_used = route.is_none();
    if fallback_used {
        tracing::warn!(
            fallback = %settings.fallback_route,
            "routing model gave no decision; using fallback route"
        );
    }
    Ok(RoutingDecision {
        route: route.unwrap_or(settings.fallback_route),
        strategy,
        rationale,
        retrieved,
        router_latency_s: start.elapsed().as_secs_f64(),
        fallback_used,
    })
}

/// Anything that turns a question into a routing decision.
pub trait RouteDecider: Send + Sync {
    fn decide(&self, question: &str) -> Result<RoutingDecision, RoutingError>;
}

/// A routing model bound to its memory, index and settings.
#[derive(Clone)]
pub struct Router {
    memory: Option<Arc<Memory>>,
    index: Option<Arc<Index>>,
    backend: Arc<dyn ChatBackend>,
    settings: RouterSettings,
}

impl Router {
    pub fn new(memory: Option<Arc<Memory>>, index: Option<Arc<Index>>, backend: Arc<dyn ChatBackend>, settings: RouterSettings) -> Self {
        Router {
            memory,
            index,
            backend,
            settings,
        }
    }

    pub fn settings(&self) -> &RouterSettings {
        &self.settings
    }

    pub fn memory(&self) -> Option<&Memory> {
        self.memory.as_deref()
    }

    pub fn index(&self) -> Option<&Index> {
        self.index.as_deref()
    }

    /// Routes with `strategy`, or the configured default.
    pub fn decide_with(&self, query: &str, strategy: Option<Strategy>) -> Result<RoutingDecision, RoutingError> {
        decide_route(
            query,
            strategy.unwrap_or(self.settings.strategy),
            self.index.as_deref(),
            self.memory.as_deref(),
            self.backend.as_ref(),
            &self.settings,
        )
    }
}

impl RouteDecider for Router {
    fn decide(&self, question: &str) -> Result<RoutingDecision, RoutingError> {
        self.decide_with(question, None)
    }
}
