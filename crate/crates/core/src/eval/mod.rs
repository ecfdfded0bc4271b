//! Benchmark evaluation: labeling rule, judging, metrics, trade-offs and
//! reports.

pub mod bench;
pub mod evaluate;
pub mod judge;
pub mod metrics;
pub mod report;
pub mod tradeoff;

use std::path::PathBuf;

pub use bench::{load_bench, read_bench, write_bench, BenchInstance, EvalSet, Source};
pub use evaluate::{
    evaluate_set, group_by_set, EvalOptions, InstanceOutcome, LabelDisagreement, SetReport, SourceReport, SystemComparison,
};
pub use judge::{judge_correct, normalize_answer, ExactMatchJudge, Judge};
pub use metrics::{
    confusion_counts, label_instance, overall_score, prf_for_class, routebench_score, routing_accuracy, ConfusionCounts, Prf,
};
pub use report::{evaluate_bench, format_rounded, render_tables, round_to, EvalReport};
pub use tradeoff::{aggregate_tradeoffs, SetSystems, SystemMetrics, TradeoffRow, TradeoffSummary};

use crate::routing::RoutingError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("no instances to evaluate")]
    EmptyInput,
    #[error("{predictions} predictions but {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("{field} must be a positive finite number of seconds, got {value}")]
    NonPositiveLatency { field: &'static str, value: f64 },
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("set {set} has no {system} metrics")]
    MissingSystem { set: EvalSet, system: &'static str },
    #[error("unknown {field} '{value}'")]
    UnknownVocabulary { field: &'static str, value: String },
    #[error("bench file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: unknown key '{key}' (strict mode)")]
    UnknownKey { line: usize, key: String },
    #[error("duplicate instance id '{0}'")]
    DuplicateId(String),
    #[error("routing instance '{id}' failed: {source}")]
    Routing {
        id: String,
        #[source]
        source: RoutingError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
