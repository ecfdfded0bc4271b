//! Ground-truth labeling rule and routing metrics.
//!
//! Class A is "route to the LLM", class B is "route to the agent".

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::route::Route;

/// Ground-truth route for one instance:
///
/// 1. only one solver correct → that solver;
/// 2. both correct → the faster one (a latency tie goes to the LLM);
/// 3. both incorrect → the agent.
pub fn label_instance(llm_correct: bool, agent_correct: bool, t_llm: f64, t_agent: f64) -> Result<Route, EvalError> {
    for (field, value) in [("llm_latency_s", t_llm), ("agent_latency_s", t_agent)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(EvalError::NonPositiveLatency { field, value });
        }
    }
    Ok(match (llm_correct, agent_correct) {
        (true, false) => Route::Llm,
        (false, true) => Route::Agent,
        (true, true) if t_llm <= t_agent => Route::Llm,
        (true, true) => Route::Agent,
        (false, false) => Route::Agent,
    })
}

fn check_lengths(predictions: &[Route], labels: &[Route]) -> Result<(), EvalError> {
    if predictions.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    Ok(())
}

/// Fraction of exact matches.
pub fn routing_accuracy(predictions: &[Route], labels: &[Route]) -> Result<f64, EvalError> {
    check_lengths(predictions, labels)?;
    if labels.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let hits = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Binary confusion counts. The false-positive/negative fields are derived,
/// so `fp_a == fn_b` and `fp_b == fn_a` hold by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tot_a: usize,
    pub tot_b: usize,
    pub tp_a: usize,
    pub tp_b: usize,
    pub fp_a: usize,
    pub fn_a: usize,
    pub fp_b: usize,
    pub fn_b: usize,
}

impl ConfusionCounts {
    pub fn new(tot_a: usize, tot_b: usize, tp_a: usize, tp_b: usize) -> Self {
        assert!(tp_a <= tot_a && tp_b <= tot_b, "true positives exceed class totals");
        let fn_a = tot_a - tp_a;
        let fn_b = tot_b - tp_b;
        ConfusionCounts {
            tot_a,
            tot_b,
            tp_a,
            tp_b,
            fp_a: fn_b,
            fn_a,
            fp_b: fn_a,
            fn_b,
        }
    }

    pub fn total(&self) -> usize {
        self.tot_a + self.tot_b
    }

    /// `(tp, fp, fn)` for one class.
    pub fn for_class(&self, class: Route) -> (usize, usize, usize) {
        match class {
            Route::Llm => (self.tp_a, self.fp_a, self.fn_a),
            Route::Agent => (self.tp_b, self.fp_b, self.fn_b),
        }
    }
}

pub fn confusion_counts(predictions: &[Route], labels: &[Route]) -> Result<ConfusionCounts, EvalError> {
    check_lengths(predictions, labels)?;
    let (mut tot_a, mut tot_b, mut tp_a, mut tp_b) = (0, 0, 0, 0);
    for (p, l) in predictions.iter().zip(labels) {
        match l {
            Route::Llm => {
                tot_a += 1;
                tp_a += usize::from(*p == Route::Llm);
            }
            Route::Agent => {
                tot_b += 1;
                tp_b += usize::from(*p == Route::Agent);
            }
        }
    }
    Ok(ConfusionCounts::new(tot_a, tot_b, tp_a, tp_b))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 for one class; any zero denominator yields 0.
pub fn prf_for_class(counts: &ConfusionCounts, class: Route) -> Prf {
    let (tp, fp, fn_) = counts.for_class(class);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Prf { precision, recall, f1 }
}

fn check_unit(name: &'static str, value: f64) -> Result<(), EvalError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(EvalError::OutOfRange { name, value })
    }
}

/// Mean of the four solver × source F1 scores.
pub fn routebench_score(f1_llm_gaia: f64, f1_agent_gaia: f64, f1_llm_mmlu: f64, f1_agent_mmlu: f64) -> Result<f64, EvalError> {
    check_unit("f1_llm_gaia", f1_llm_gaia)?;
    check_unit("f1_agent_gaia", f1_agent_gaia)?;
    check_unit("f1_llm_mmlu", f1_llm_mmlu)?;
    check_unit("f1_agent_mmlu", f1_agent_mmlu)?;
    Ok((f1_llm_gaia + f1_agent_gaia + f1_llm_mmlu + f1_agent_mmlu) / 4.0)
}

/// Overall model score: mean of the per-set scores.
pub fn overall_score(set_scores: &[f64]) -> Result<f64, EvalError> {
    if set_scores.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    for &s in set_scores {
        check_unit("set_score", s)?;
    }
    Ok(set_scores.iter().sum::<f64>() / set_scores.len() as f64)
}
