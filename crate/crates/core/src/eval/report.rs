//! Report document and display formatting.
//!
//! Full precision goes into the JSON report; tables round to 2 places, and
//! overall averages round to 3.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::bench::{BenchInstance, EvalSet};
use super::evaluate::{evaluate_set, group_by_set, EvalOptions, SetReport};
use super::metrics::overall_score;
use super::tradeoff::{aggregate_tradeoffs, TradeoffSummary};
use super::EvalError;
use crate::routing::{RouteDecider, Strategy};

pub const TABLE_PLACES: u32 = 2;
pub const AVERAGE_PLACES: u32 = 3;

/// Rounds half away from zero after snapping off binary noise, so that a
/// value stored as 0.83249999… still prints as 0.833.
pub fn round_to(value: f64, places: u32) -> f64 {
    let scale = 10f64.powi(places as i32);
    let snapped = (value * scale * 1e6).round() / 1e6;
    snapped.round() / scale
}

pub fn format_rounded(value: f64, places: u32) -> String {
    format!("{:.*}", places as usize, round_to(value, places))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tool_version: String,
    pub generated_at: String,
    pub strategy: Strategy,
    /// Effective configuration, secrets excluded.
    pub config: serde_json::Value,
    pub sets: Vec<SetReport>,
    /// Mean of the per-set scores.
    pub overall_score: f64,
    /// Present when every set has all three systems.
    pub tradeoffs: Option<TradeoffSummary>,
}

/// Evaluates each set of a bench separately and aggregates.
pub fn evaluate_bench(
    instances: &[BenchInstance],
    decider: &dyn RouteDecider,
    options: &EvalOptions<'_>,
    strategy: Strategy,
    config: serde_json::Value,
) -> Result<EvalReport, EvalError> {
    if instances.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut sets = Vec::new();
    for (set, group) in group_by_set(instances) {
        tracing::info!(set = %set, instances = group.len(), "evaluating set");
        sets.push(evaluate_set(&group, decider, options)?);
    }
    let scores: Vec<f64> = sets.iter().map(|s| s.score).collect();
    let systems = sets
        .iter()
        .filter_map(|s| s.set.map(|set| (set, s.systems.as_set_systems())))
        .collect();
    Ok(EvalReport {
        tool_version: crate::TOOL_VERSION.to_string(),
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        strategy,
        config,
        overall_score: overall_score(&scores)?,
        tradeoffs: aggregate_tradeoffs(&systems).ok(),
        sets,
    })
}

fn set_name(set: Option<EvalSet>) -> &'static str {
    set.map_or("mixed", EvalSet::as_str)
}

/// Plain-text tables for standard output.
pub fn render_tables(report: &EvalReport) -> String {
    let r2 = |v: f64| format_rounded(v, TABLE_PLACES);
    let mut out = String::new();
    let _ = writeln!(out, "strategy: {}", report.strategy);
    let _ = writeln!(
        out,
        "{:<10} {:<6} {:>5} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
        "set", "source", "n", "acc", "llm_p", "llm_r", "llm_f1", "agt_p", "agt_r", "agt_f1", "lat_s"
    );
    for set in &report.sets {
        for (source, s) in &set.per_source {
            let _ = writeln!(
                out,
                "{:<10} {:<6} {:>5} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
                set_name(set.set),
                source.as_str(),
                s.count,
                r2(s.routing_accuracy),
                r2(s.llm.precision),
                r2(s.llm.recall),
                r2(s.llm.f1),
                r2(s.agent.precision),
                r2(s.agent.recall),
                r2(s.agent.f1),
                r2(s.routed_mean_latency_s),
            );
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<10} {:>6} {:>8} {:>8} {:>8} {:>9} {:>9} {:>9}",
        "set", "score", "llm_acc", "agt_acc", "rt_acc", "llm_lat", "agt_lat", "rt_lat"
    );
    for set in &report.sets {
        let sys = &set.systems;
        let _ = writeln!(
            out,
            "{:<10} {:>6} {:>8} {:>8} {:>8} {:>9} {:>9} {:>9}",
            set_name(set.set),
            r2(set.score),
            r2(sys.llm_only.accuracy),
            r2(sys.agent_only.accuracy),
            r2(sys.routed.accuracy),
            r2(sys.llm_only.mean_latency_s),
            r2(sys.agent_only.mean_latency_s),
            r2(sys.routed.mean_latency_s),
        );
    }
    let _ = writeln!(out, "overall score: {}", format_rounded(report.overall_score, AVERAGE_PLACES));
    if let Some(t) = &report.tradeoffs {
        let pct = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{}%", format_rounded(v * 100.0, 1)));
        let times = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{}x", format_rounded(v, 1)));
        let p = &t.ratio_of_pooled_means;
        let m = &t.mean_of_set_ratios;
        let _ = writeln!(out, "trade-offs (pooled means | mean of set ratios):");
        let _ = writeln!(
            out,
            "  accuracy gain over LLM-only:   {} | {}",
            pct(p.accuracy_gain_over_llm),
            pct(m.accuracy_gain_over_llm)
        );
        let _ = writeln!(
            out,
            "  accuracy drop vs Agent-only:   {} | {}",
            pct(p.accuracy_drop_vs_agent),
            pct(m.accuracy_drop_vs_agent)
        );
        let _ = writeln!(
            out,
            "  time reduction vs Agent-only:  {} | {}",
            pct(p.time_reduction_vs_agent),
            pct(m.time_reduction_vs_agent)
        );
        let _ = writeln!(
            out,
            "  Agent/LLM latency ratio:       {} | {}",
            times(p.agent_llm_speed_ratio),
            times(m.agent_llm_speed_ratio)
        );
    }
    out
}
