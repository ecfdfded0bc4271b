use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use routegate_core::eval::{evaluate_bench, load_bench, EvalOptions, EvalReport, ExactMatchJudge};
use routegate_core::memory::LoadOptions;
use routegate_core::retrieval::build_index;
use routegate_core::routing::RouteDecider;
use routegate_core::setup;
use routegate_core::solvers::execute_route;
use routegate_core::{AgentBackend, AppConfig, ChatBackend, Memory, Router, RoutingDecision, RoutingError, SolverResult};
use serde::Serialize;

use crate::CliError;

fn required<'a>(value: &'a Option<PathBuf>, what: &'static str) -> Result<&'a Path, CliError> {
    value.as_deref().ok_or(CliError::Missing(what))
}

/// Loads memory and index and builds a router on `backend`. Retrieval
/// strategies without a memory fail here rather than per question.
pub fn load_router(config: &AppConfig, backend: Arc<dyn ChatBackend>) -> anyhow::Result<Router> {
    let components = setup::load_components(config)?;
    let strategy = config.router.strategy;
    if strategy.uses_retrieval() && components.index.is_none() {
        return Err(RoutingError::IndexMissing(strategy).into());
    }
    Ok(setup::build_router(config, &components, backend)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSummary {
    pub records: usize,
    pub path: PathBuf,
}

pub fn run_index(config: &AppConfig, output: Option<&Path>) -> anyhow::Result<IndexSummary> {
    let memory_path = required(&config.memory.path, "memory.path (--memory)")?;
    let output = match output {
        Some(p) => p,
        None => required(&config.retrieval.index_cache, "retrieval.index_cache (--output)")?,
    };
    let memory = Memory::load_with(memory_path, config.memory_load_options())?;
    let index = build_index(&memory, &config.retrieval_config())?;
    index
        .save_cache(output)
        .with_context(|| format!("cannot write index cache {}", output.display()))?;
    Ok(IndexSummary {
        records: index.len(),
        path: output.to_path_buf(),
    })
}

pub fn run_route(config: &AppConfig, backend: Arc<dyn ChatBackend>, question: &str) -> anyhow::Result<RoutingDecision> {
    let question = question.trim();
    if question.is_empty() {
        return Err(CliError::Input("question must not be empty".into()).into());
    }
    let router = load_router(config, backend)?;
    Ok(router.decide(question)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnswerOutput {
    pub decision: RoutingDecision,
    pub result: SolverResult,
}

pub fn run_answer(
    config: &AppConfig,
    router_backend: Arc<dyn ChatBackend>,
    llm: &dyn ChatBackend,
    agent: &dyn AgentBackend,
    question: &str,
) -> anyhow::Result<AnswerOutput> {
    let decision = run_route(config, router_backend, question)?;
    let result = execute_route(question.trim(), &decision, llm, agent, config.execute_options());
    Ok(AnswerOutput { decision, result })
}

/// Evaluates the bench at `bench.path` and writes the report to
/// `eval.report` when set.
pub fn run_eval(config: &AppConfig, backend: Arc<dyn ChatBackend>) -> anyhow::Result<EvalReport> {
    let bench_path = required(&config.bench.path, "bench.path (--bench)")?;
    let instances = load_bench(bench_path, LoadOptions { strict: config.strict })?;
    let router = load_router(config, backend)?;
    let options = EvalOptions {
        judge: &ExactMatchJudge,
        execution: config.execution(),
        max_inflight: config.runtime.max_inflight,
        verify_labels: config.eval.verify_labels,
    };
    let report = evaluate_bench(&instances, &router, &options, config.router.strategy, config.snapshot())?;
    if let Some(path) = &config.eval.report {
        let json = serde_json::to_string_pretty(&report)?;
        std::fs::write(path, json + "\n").with_context(|| format!("cannot write report {}", path.display()))?;
        tracing::info!(path = %path.display(), "report written");
    }
    Ok(report)
}
