use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::Context;
use routegate_core::memory::{record_experience, LoadOptions};
use routegate_core::solvers::solve_with_both;
use routegate_core::{AgentBackend, ChatBackend, Execution, Memory};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct SeedQuestion {
    pub id: String,
    pub question: String,
    #[serde(default)]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedSummary {
    pub processed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SeedOptions {
    pub execution: Execution,
    pub max_inflight: usize,
    pub load: LoadOptions,
}

impl Default for SeedOptions {
    fn default() -> Self {
        SeedOptions {
            execution: Execution::default(),
            max_inflight: 8,
            load: LoadOptions::default(),
        }
    }
}

pub fn read_questions(path: &Path) -> anyhow::Result<Vec<SeedQuestion>> {
    let file = File::open(path).with_context(|| format!("cannot open questions file {}", path.display()))?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let q: SeedQuestion =
            serde_json::from_str(&line).map_err(|e| CliError::Input(format!("{} line {}: {e}", path.display(), i + 1)))?;
        if q.id.trim().is_empty() || q.question.trim().is_empty() {
            return Err(CliError::Input(format!("{} line {}: id and question must be non-empty", path.display(), i + 1)).into());
        }
        if !seen.insert(q.id.clone()) {
            return Err(CliError::Input(format!("{} line {}: duplicate id '{}'", path.display(), i + 1, q.id)).into());
        }
        out.push(q);
    }
    if out.is_empty() {
        return Err(CliError::EmptyInput(path.to_path_buf()).into());
    }
    Ok(out)
}

fn check_writable(path: &Path) -> anyhow::Result<()> {
    if path.exists() {
        OpenOptions::new()
            .append(true)
            .open(path)
            .with_context(|| format!("memory file {} is not writable", path.display()))?;
        return Ok(());
    }
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    if !parent.is_dir() {
        anyhow::bail!(
            "cannot write memory file {}: {} is not a directory",
            path.display(),
            parent.display()
        );
    }
    Ok(())
}

/// Runs both solvers on every question and appends the successful pairs to
/// the memory at `output`, creating it if needed.
pub fn run_seed(
    questions: &Path,
    output: &Path,
    llm: &dyn ChatBackend,
    agent: &dyn AgentBackend,
    options: &SeedOptions,
) -> anyhow::Result<SeedSummary> {
    let questions = read_questions(questions)?;
    check_writable(output)?;
    let mut memory = if output.exists() {
        Memory::load_with(output, options.load)?
    } else {
        Memory::new()
    };

    let exec = options.execution;
    let results = exec.with_inflight_cap(options.max_inflight, || {
        exec.map(&questions, |q| solve_with_both(&q.question, llm, agent))
    });

    let mut summary = SeedSummary { processed: 0, failed: 0 };
    for (q, (llm_result, agent_result)) in questions.iter().zip(&results) {
        if memory.get(&q.id).is_some() {
            tracing::warn!(id = %q.id, "already in the memory; skipped");
            summary.failed += 1;
            continue;
        }
        let record = record_experience(q.id.clone(), &q.question, llm_result, agent_result).and_then(|mut r| {
            r.source = q.source.clone();
            memory.append(r)
        });
        match record {
            Ok(()) => summary.processed += 1,
            Err(e) => {
                tracing::warn!(id = %q.id, "seed question failed: {e}");
                summary.failed += 1;
            }
        }
    }
    if summary.processed == 0 {
        return Err(CliError::AllFailed { failed: summary.failed }.into());
    }
    memory.save(output)?;
    tracing::info!(processed = summary.processed, failed = summary.failed, path = %output.display(), "memory written");
    Ok(summary)
}
