//! Training-free routing between a fast direct-LLM solver and a slow agent
//! solver.
//!
//! A router retrieves similar cases from an early-experience memory (both
//! solvers' answers and latencies on a seed set, never gold labels), renders
//! them into a routing prompt and asks a routing model to pick a solver. The
//! [`eval`] module carries the benchmark side: the ground-truth labeling rule,
//! per-solver precision/recall/F1 and the aggregate score.
//!
//! Data-parallel work (exhaustive retrieval scoring, batch evaluation,
//! seeding) runs on rayon when the `parallel` feature is enabled and falls
//! back to plain iterators otherwise; see [`exec`].

pub mod config;
pub mod eval;
pub mod exec;
pub mod memory;
pub mod retrieval;
pub mod route;
pub mod routing;
pub mod setup;
pub mod solvers;

pub use config::{AppConfig, ConfigError};
pub use eval::{BenchInstance, EvalError, SetReport};
pub use exec::Execution;
pub use memory::{ExperienceRecord, Memory, MemoryError};
pub use retrieval::{Index, RetrievalConfig, RetrievalError, RetrievedCase};
pub use route::Route;
pub use routing::{Router, RouterSettings, RoutingDecision, RoutingError, Strategy};
pub use solvers::{AgentBackend, BackendError, ChatBackend, SolverResult};

/// Version string embedded into reports.
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
