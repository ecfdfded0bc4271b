//! Accuracy/latency trade-offs between LLM-only, Agent-only and routed
//! systems.
//!
//! Cross-set aggregates come in two conventions, both always reported:
//! `mean_of_set_ratios` averages the per-set ratios, `ratio_of_pooled_means`
//! first averages each system's accuracy and latency over the sets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::bench::EvalSet;
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SystemMetrics {
    pub accuracy: f64,
    pub mean_latency_s: f64,
}

/// Per-set inputs; every system must be present.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SetSystems {
    pub llm_only: Option<SystemMetrics>,
    pub agent_only: Option<SystemMetrics>,
    pub routed: Option<SystemMetrics>,
}

impl SetSystems {
    pub fn complete(llm_only: SystemMetrics, agent_only: SystemMetrics, routed: SystemMetrics) -> Self {
        SetSystems {
            llm_only: Some(llm_only),
            agent_only: Some(agent_only),
            routed: Some(routed),
        }
    }
}

/// Ratios are `None` when their denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TradeoffRow {
    /// routed / LLM-only accuracy − 1.
    pub accuracy_gain_over_llm: Option<f64>,
    /// 1 − routed / Agent-only accuracy.
    pub accuracy_drop_vs_agent: Option<f64>,
    /// 1 − routed / Agent-only latency.
    pub time_reduction_vs_agent: Option<f64>,
    /// Agent-only / LLM-only latency.
    pub agent_llm_speed_ratio: Option<f64>,
    /// Agent-only / LLM-only accuracy − 1.
    pub agent_accuracy_gain_over_llm: Option<f64>,
}

fn div(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

impl TradeoffRow {
    pub fn from_systems(llm: SystemMetrics, agent: SystemMetrics, routed: SystemMetrics) -> Self {
        TradeoffRow {
            accuracy_gain_over_llm: div(routed.accuracy, llm.accuracy).map(|r| r - 1.0),
            accuracy_drop_vs_agent: div(routed.accuracy, agent.accuracy).map(|r| 1.0 - r),
            time_reduction_vs_agent: div(routed.mean_latency_s, agent.mean_latency_s).map(|r| 1.0 - r),
            agent_llm_speed_ratio: div(agent.mean_latency_s, llm.mean_latency_s),
            agent_accuracy_gain_over_llm: div(agent.accuracy, llm.accuracy).map(|r| r - 1.0),
        }
    }

    fn fields(&self) -> [Option<f64>; 5] {
        [
            self.accuracy_gain_over_llm,
            self.accuracy_drop_vs_agent,
            self.time_reduction_vs_agent,
            self.agent_llm_speed_ratio,
            self.agent_accuracy_gain_over_llm,
        ]
    }

    fn from_fields(f: [Option<f64>; 5]) -> Self {
        TradeoffRow {
            accuracy_gain_over_llm: f[0],
            accuracy_drop_vs_agent: f[1],
            time_reduction_vs_agent: f[2],
            agent_llm_speed_ratio: f[3],
            agent_accuracy_gain_over_llm: f[4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffSummary {
    pub per_set: BTreeMap<EvalSet, TradeoffRow>,
    pub mean_of_set_ratios: TradeoffRow,
    pub ratio_of_pooled_means: TradeoffRow,
    /// Each system's accuracy and latency averaged over the sets.
    pub pooled_llm_only: SystemMetrics,
    pub pooled_agent_only: SystemMetrics,
    pub pooled_routed: SystemMetrics,
}

fn mean_metrics(items: &[SystemMetrics]) -> SystemMetrics {
    let n = items.len() as f64;
    SystemMetrics {
        accuracy: items.iter().map(|m| m.accuracy).sum::<f64>() / n,
        mean_latency_s: items.iter().map(|m| m.mean_latency_s).sum::<f64>() / n,
    }
}

pub fn aggregate_tradeoffs(sets: &BTreeMap<EvalSet, SetSystems>) -> Result<TradeoffSummary, EvalError> {
    if sets.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut per_set = BTreeMap::new();
    let (mut llms, mut agents, mut routeds) = (Vec::new(), Vec::new(), Vec::new());
    for (&set, systems) in sets {
        let need = |m: Option<SystemMetrics>, system: &'static str| m.ok_or(EvalError::MissingSystem { set, system });
        let llm = need(systems.llm_only, "llm_only")?;
        let agent = need(systems.agent_only, "agent_only")?;
        let routed = need(systems.routed, "routed")?;
        per_set.insert(set, TradeoffRow::from_systems(llm, agent, routed));
        llms.push(llm);
        agents.push(agent);
        routeds.push(routed);
    }

    let rows: Vec<[Option<f64>; 5]> = per_set.values().map(TradeoffRow::fields).collect();
    let mut mean = [None; 5];
    for (i, slot) in mean.iter_mut().enumerate() {
        let column: Option<Vec<f64>> = rows.iter().map(|r| r[i]).collect();
        *slot = column.map(|c| c.iter().sum::<f64>() / c.len() as f64);
    }

    let pooled_llm_only = mean_metrics(&llms);
    let pooled_agent_only = mean_metrics(&agents);
    let pooled_routed = mean_metrics(&routeds);
    Ok(TradeoffSummary {
        per_set,
        mean_of_set_ratios: TradeoffRow::from_fields(mean),
        ratio_of_pooled_means: TradeoffRow::from_systems(pooled_llm_only, pooled_agent_only, pooled_routed),
        pooled_llm_only,
        pooled_agent_only,
        pooled_routed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(accuracy: f64, mean_latency_s: f64) -> SystemMetrics {
        SystemMetrics { accuracy, mean_latency_s }
    }

    fn table() -> BTreeMap<EvalSet, SetSystems> {
        BTreeMap::from([
            (
                EvalSet::Base,
                SetSystems::complete(m(0.528, 4.431), m(0.77, 264.99), m(0.713, 101.86)),
            ),
            (
                EvalSet::Rephrase,
                SetSystems::complete(m(0.54, 2.27), m(0.793, 169.70), m(0.713, 92.81)),
            ),
            (
                EvalSet::Advanced,
                SetSystems::complete(m(0.64, 4.53), m(0.87, 232.18), m(0.77, 91.58)),
            ),
        ])
    }

    #[test]
    fn headline_ratios() {
        let s = aggregate_tradeoffs(&table()).unwrap();
        let pooled = s.ratio_of_pooled_means;
        assert!((pooled.accuracy_gain_over_llm.unwrap() - 0.286).abs() < 0.002);
        assert!((pooled.agent_llm_speed_ratio.unwrap() - 59.4).abs() < 0.1);
        let adv = s.per_set[&EvalSet::Advanced];
        assert!((adv.time_reduction_vs_agent.unwrap() - 0.606).abs() < 0.002);
        assert!((adv.accuracy_drop_vs_agent.unwrap() - 0.115).abs() < 0.002);
    }

    #[test]
    fn mean_of_ratios_differs_from_pooled() {
        let s = aggregate_tradeoffs(&table()).unwrap();
        let a = s.mean_of_set_ratios.accuracy_gain_over_llm.unwrap();
        let b = s.ratio_of_pooled_means.accuracy_gain_over_llm.unwrap();
        assert!((a - b).abs() > 1e-3);
    }

    #[test]
    fn missing_system_is_named() {
        let mut t = table();
        t.get_mut(&EvalSet::Rephrase).unwrap().routed = None;
        assert!(matches!(
            aggregate_tradeoffs(&t),
            Err(EvalError::MissingSystem {
                set: EvalSet::Rephrase,
                system: "routed"
            })
        ));
        assert!(matches!(aggregate_tradeoffs(&BTreeMap::new()), Err(EvalError::EmptyInput)));
    }

    #[test]
    fn zero_denominators_are_none() {
        let t = BTreeMap::from([(EvalSet::Base, SetSystems::complete(m(0.0, 0.0), m(0.5, 10.0), m(0.4, 5.0)))]);
        let s = aggregate_tradeoffs(&t).unwrap();
        assert_eq!(s.per_set[&EvalSet::Base].accuracy_gain_over_llm, None);
        assert_eq!(s.mean_of_set_ratios.agent_llm_speed_ratio, None);
        assert!(s.per_set[&EvalSet::Base].time_reduction_vs_agent.is_some());
    }
}
