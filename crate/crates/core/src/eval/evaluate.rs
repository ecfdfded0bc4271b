//! Set-level evaluation of a router against labeled bench instances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::bench::{BenchInstance, EvalSet, Source};
use super::judge::{ExactMatchJudge, Judge};
use super::metrics::{confusion_counts, prf_for_class, routebench_score, routing_accuracy, ConfusionCounts, Prf};
use super::tradeoff::{SetSystems, SystemMetrics};
use super::EvalError;
use crate::exec::Execution;
use crate::route::Route;
use crate::routing::RouteDecider;

#[derive(Clone, Copy)]
pub struct EvalOptions<'a> {
    pub judge: &'a dyn Judge,
    pub execution: Execution,
    /// Upper bound on concurrent router calls.
    pub max_inflight: usize,
    /// Recompute every stored label and report disagreements.
    pub verify_labels: bool,
}

impl Default for EvalOptions<'static> {
    fn default() -> Self {
        EvalOptions {
            judge: &ExactMatchJudge,
            execution: Execution::default(),
            max_inflight: 8,
            verify_labels: false,
        }
    }
}

/// Accuracy and mean latency of the three systems over the same instances.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SystemComparison {
    pub llm_only: SystemMetrics,
    pub agent_only: SystemMetrics,
    pub routed: SystemMetrics,
}

impl SystemComparison {
    pub fn as_set_systems(&self) -> SetSystems {
        SetSystems::complete(self.llm_only, self.agent_only, self.routed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceReport {
    pub count: usize,
    pub routing_accuracy: f64,
    pub confusion: ConfusionCounts,
    pub llm: Prf,
    pub agent: Prf,
    /// Mean stored latency of the solver the router picked.
    pub routed_mean_latency_s: f64,
    pub systems: SystemComparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub id: String,
    pub source: Source,
    pub label: Route,
    pub predicted: Route,
    pub fallback_used: bool,
    pub retrieved: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDisagreement {
    pub id: String,
    pub stored: Route,
    pub derived: Route,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetReport {
    /// Present when every instance belongs to the same set.
    pub set: Option<EvalSet>,
    pub count: usize,
    pub routing_accuracy: f64,
    pub confusion: ConfusionCounts,
    pub llm: Prf,
    pub agent: Prf,
    pub per_source: BTreeMap<Source, SourceReport>,
    /// Mean of the solver F1 scores over the sources present in the set.
    pub score: f64,
    pub fallback_count: usize,
    pub systems: SystemComparison,
    pub instances: Vec<InstanceOutcome>,
    pub label_disagreements: Vec<LabelDisagreement>,
}

struct Scored<'a> {
    instance: &'a BenchInstance,
    label: Route,
    predicted: Route,
    llm_correct: bool,
    agent_correct: bool,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn systems(rows: &[&Scored<'_>]) -> SystemComparison {
    let frac = |f: &dyn Fn(&Scored<'_>) -> bool| mean(rows.iter().map(|r| f(r) as u8 as f64));
    SystemComparison {
        llm_only: SystemMetrics {
            accuracy: frac(&|r| r.llm_correct),
            mean_latency_s: mean(rows.iter().map(|r| r.instance.llm_latency_s)),
        },
        agent_only: SystemMetrics {
            accuracy: frac(&|r| r.agent_correct),
            mean_latency_s: mean(rows.iter().map(|r| r.instance.agent_latency_s)),
        },
        routed: SystemMetrics {
            accuracy: frac(&|r| match r.predicted {
                Route::Llm => r.llm_correct,
                Route::Agent => r.agent_correct,
            }),
            mean_latency_s: mean(rows.iter().map(|r| r.instance.outcome(r.predicted).1)),
        },
    }
}

fn class_metrics(rows: &[&Scored<'_>]) -> Result<(f64, ConfusionCounts, Prf, Prf), EvalError> {
    let preds: Vec<Route> = rows.iter().map(|r| r.predicted).collect();
    let labels: Vec<Route> = rows.iter().map(|r| r.label).collect();
    let confusion = confusion_counts(&preds, &labels)?;
    Ok((
        routing_accuracy(&preds, &labels)?,
        confusion,
        prf_for_class(&confusion, Route::Llm),
        prf_for_class(&confusion, Route::Agent),
    ))
}

/// Routes every instance and scores the predictions against the labels.
///
/// Routing may run concurrently; the metric fold always walks the results in
/// instance order.
pub fn evaluate_set(instances: &[BenchInstance], decider: &dyn RouteDecider, options: &EvalOptions<'_>) -> Result<SetReport, EvalError> {
    if instances.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    for instance in instances {
        instance.validate()?;
    }

    let exec = options.execution;
    let decisions = exec.with_inflight_cap(options.max_inflight, || {
        exec.map(instances, |instance| decider.decide(&instance.question))
    });

    let judge = options.judge;
    let mut scored = Vec::with_capacity(instances.len());
    let mut outcomes = Vec::with_capacity(instances.len());
    let mut label_disagreements = Vec::new();
    let mut fallback_count = 0;
    for (instance, decision) in instances.iter().zip(decisions) {
        let decision = decision.map_err(|source| EvalError::Routing {
            id: instance.id.clone(),
            source,
        })?;
        let label = instance.resolved_label(judge)?;
        if options.verify_labels {
            if let Some(stored) = instance.label {
                let derived = instance.derive_label(judge)?;
                if derived != stored {
                    label_disagreements.push(LabelDisagreement {
                        id: instance.id.clone(),
                        stored,
                        derived,
                    });
                }
            }
        }
        fallback_count += usize::from(decision.fallback_used);
        outcomes.push(InstanceOutcome {
            id: instance.id.clone(),
            source: instance.source,
            label,
            predicted: decision.route,
            fallback_used: decision.fallback_used,
            retrieved: decision.retrieved.iter().map(|c| c.id.clone()).collect(),
        });
        scored.push(Scored {
            instance,
            label,
            predicted: decision.route,
            llm_correct: instance.llm_correct(judge),
            agent_correct: instance.agent_correct(judge),
        });
    }

    let all: Vec<&Scored<'_>> = scored.iter().collect();
    let (accuracy, confusion, llm, agent) = class_metrics(&all)?;

    let mut per_source = BTreeMap::new();
    for source in Source::ALL {
        let rows: Vec<&Scored<'_>> = scored.iter().filter(|r| r.instance.source == source).collect();
        if rows.is_empty() {
            continue;
        }
        let (acc, conf, l, a) = class_metrics(&rows)?;
        let systems = systems(&rows);
        per_source.insert(
            source,
            SourceReport {
                count: rows.len(),
                routing_accuracy: acc,
                confusion: conf,
                llm: l,
                agent: a,
                routed_mean_latency_s: systems.routed.mean_latency_s,
                systems,
            },
        );
    }

    let score = match (per_source.get(&Source::Gaia), per_source.get(&Source::Mmlu)) {
        (Some(g), Some(m)) => routebench_score(g.llm.f1, g.agent.f1, m.llm.f1, m.agent.f1)?,
        (Some(only), None) | (None, Some(only)) => (only.llm.f1 + only.agent.f1) / 2.0,
        (None, None) => unreachable!("non-empty set has at least one source"),
    };

    let first = instances[0].set;
    Ok(SetReport {
        set: instances.iter().all(|i| i.set == first).then_some(first),
        count: instances.len(),
        routing_accuracy: accuracy,
        confusion,
        llm,
        agent,
        per_source,
        score,
        fallback_count,
        systems: systems(&all),
        instances: outcomes,
        label_disagreements,
    })
}

/// Splits a bench into its sets, in canonical set order.
pub fn group_by_set(instances: &[BenchInstance]) -> BTreeMap<EvalSet, Vec<BenchInstance>> {
    let mut groups: BTreeMap<EvalSet, Vec<BenchInstance>> = BTreeMap::new();
    for instance in instances {
        groups.entry(instance.set).or_default().push(instance.clone());
    }
    groups
}
