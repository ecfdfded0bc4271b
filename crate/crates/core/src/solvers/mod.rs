//! The two candidate solvers and the router's chat backend.
//!
//! Everything upstream is reached through two object-safe traits,
//! [`ChatBackend`] (OpenAI-compatible chat completions, used both by the
//! direct-LLM solver and by the routing model) and [`AgentBackend`] (the
//! opaque agent endpoint). HTTP clients live in [`http`], deterministic test
//! doubles in [`mock`].

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::route::Route;
use crate::routing::RoutingDecision;

pub mod http;
mod limit;
pub mod mock;

pub use http::{AgentEndpointConfig, ChatBackendConfig, HttpAgentClient, OpenAiChatClient};
pub use limit::InflightLimiter;

/// Upstream failure, as seen by a caller.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendError {
    #[error("request timed out")]
    Timeout,
    #[error("authentication rejected by upstream")]
    AuthFailure,
    #[error("transport error: {message}")]
    Transport { message: String },
    #[error("upstream returned status {status}")]
    Upstream { status: u16 },
    #[error("invalid upstream response: {message}")]
    InvalidResponse { message: String },
    #[error("credential environment variable {env} is not set")]
    MissingCredential { env: String },
}

impl BackendError {
    /// Worth retrying with backoff.
    pub fn is_transient(&self) -> bool {
        match self {
            BackendError::Timeout | BackendError::Transport { .. } => true,
            BackendError::Upstream { status } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

/// Single-turn chat completion.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, BackendError>;
}

/// Agent endpoint reply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentReply {
    pub answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u32>,
}

pub trait AgentBackend: Send + Sync {
    fn solve(&self, question: &str) -> Result<AgentReply, BackendError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for std::sync::Arc<T> {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        (**self).complete(prompt)
    }
}

impl<T: AgentBackend + ?Sized> AgentBackend for std::sync::Arc<T> {
    fn solve(&self, question: &str) -> Result<AgentReply, BackendError> {
        (**self).solve(question)
    }
}

/// One solver run: answer (or failure) plus end-to-end wall-clock latency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub solver: Route,
    /// Empty when `error` is set.
    pub answer: String,
    pub latency_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<BackendError>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u32>,
}

impl SolverResult {
    pub fn ok(solver: Route, answer: impl Into<String>, latency_s: f64) -> Self {
        SolverResult {
            solver,
            answer: answer.into(),
            latency_s,
            error: None,
            steps: None,
        }
    }

    pub fn failed(solver: Route, error: BackendError, latency_s: f64) -> Self {
        SolverResult {
            solver,
            answer: String::new(),
            latency_s,
            error: Some(error),
            steps: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

// A monotonic clock can report zero for very fast mocks; latencies stay > 0.
fn elapsed_s(start: Instant) -> f64 {
    start.elapsed().as_secs_f64().max(1e-9)
}

/// Direct-LLM solver: the whole completion is the answer.
pub fn solve_with_llm(query: &str, backend: &dyn ChatBackend) -> SolverResult {
    let start = Instant::now();
    let outcome = backend.complete(query);
    let latency = elapsed_s(start);
    match outcome {
        Ok(answer) => SolverResult::ok(Route::Llm, answer, latency),
        Err(e) => SolverResult::failed(Route::Llm, e, latency),
    }
}

pub fn solve_with_agent(query: &str, agent: &dyn AgentBackend) -> SolverResult {
    let start = Instant::now();
    let outcome = agent.solve(query);
    let latency = elapsed_s(start);
    match outcome {
        Ok(reply) => SolverResult {
            steps: reply.steps,
            ..SolverResult::ok(Route::Agent, reply.answer, latency)
        },
        Err(e) => SolverResult::failed(Route::Agent, e, latency),
    }
}

/// Runs both solvers on the same question concurrently, each timed on its own.
pub fn solve_with_both(query: &str, llm: &dyn ChatBackend, agent: &dyn AgentBackend) -> (SolverResult, SolverResult) {
    std::thread::scope(|s| {
        let agent_run = s.spawn(|| solve_with_agent(query, agent));
        let llm_result = solve_with_llm(query, llm);
        let agent_result = agent_run.join().unwrap_or_else(|_| {
            SolverResult::failed(
                Route::Agent,
                BackendError::Transport {
                    message: "agent worker panicked".into(),
                },
                1e-9,
            )
        });
        (llm_result, agent_result)
    })
}

/// Options for [`execute_route`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecuteOptions {
    /// Re-run a failed LLM call on the agent. Off by default: it breaks the
    /// one-solver-per-query latency accounting.
    pub escalate_on_failure: bool,
}

/// Dispatches the query to exactly the solver named by the decision.
pub fn execute_route(
    query: &str,
    decision: &RoutingDecision,
    llm: &dyn ChatBackend,
    agent: &dyn AgentBackend,
    options: ExecuteOptions,
) -> SolverResult {
    match decision.route {
        Route::Agent => solve_with_agent(query, agent),
        Route::Llm => {
            let result = solve_with_llm(query, llm);
            if result.is_ok() || !options.escalate_on_failure {
                return result;
            }
            tracing::info!("LLM solver failed; escalating to agent");
            let mut escalated = solve_with_agent(query, agent);
            escalated.latency_s += result.latency_s;
            escalated
        }
    }
}
