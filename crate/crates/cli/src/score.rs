use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use anyhow::Context;
use routegate_core::eval::report::AVERAGE_PLACES;
use routegate_core::eval::{format_rounded, overall_score, round_to, routebench_score};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct F1Row {
    #[serde(default)]
    pub set: Option<String>,
    pub f1_llm_gaia: f64,
    pub f1_agent_gaia: f64,
    pub f1_llm_mmlu: f64,
    pub f1_agent_mmlu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub set: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreSummary {
    pub rows: Vec<ScoreRow>,
    /// Mean of the unrounded row scores.
    pub average: f64,
}

pub fn run_score(path: &Path) -> anyhow::Result<ScoreSummary> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |e: &dyn std::fmt::Display| CliError::Input(format!("{} line {}: {e}", path.display(), i + 1));
        let row: F1Row = serde_json::from_str(&line).map_err(|e| at(&e))?;
        let score = routebench_score(row.f1_llm_gaia, row.f1_agent_gaia, row.f1_llm_mmlu, row.f1_agent_mmlu).map_err(|e| at(&e))?;
        rows.push(ScoreRow {
            set: row.set.unwrap_or_else(|| format!("row {}", rows.len() + 1)),
            score,
        });
    }
    if rows.is_empty() {
        return Err(CliError::EmptyInput(path.to_path_buf()).into());
    }
    let scores: Vec<f64> = rows.iter().map(|r| r.score).collect();
    let average = overall_score(&scores)?;
    Ok(ScoreSummary { rows, average })
}

pub fn render_scores(summary: &ScoreSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {:>6} {:>8}", "set", "score", "exact");
    for row in &summary.rows {
        let _ = writeln!(
            out,
            "{:<12} {:>6} {:>8}",
            row.set,
            format_rounded(row.score, AVERAGE_PLACES),
            round_to(row.score, 9)
        );
    }
    let _ = writeln!(out, "average: {}", format_rounded(summary.average, AVERAGE_PLACES));
    out
}
