//! Early-experience memory: both solvers' answers and latencies on a seed
//! set of questions.
//!
//! Records hold deployment-time observables only. There is no field for a
//! gold answer, correctness label or reward, and the on-disk form (one JSON
//! object per line) cannot carry one.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::solvers::SolverResult;

const REQUIRED_KEYS: [&str; 6] = ["id", "question", "llm_answer", "llm_latency_s", "agent_answer", "agent_latency_s"];
const OPTIONAL_KEYS: [&str; 2] = ["source", "created_at"];

#[derive(Debug, thiserror::Error)]
pub enum MemoryError {
    #[error("question is empty")]
    EmptyQuestion,
    #[error("record {id}: {field} must be a positive finite number of seconds, got {value}")]
    NonPositiveLatency { id: String, field: &'static str, value: f64 },
    #[error("{solver} result carries no answer: {reason}")]
    MissingAnswer { solver: &'static str, reason: String },
    #[error("duplicate record id '{0}'")]
    DuplicateId(String),
    #[error("memory file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: unknown key '{key}' (strict mode)")]
    UnknownKey { line: usize, key: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One seed question with both solvers' observable behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperienceRecord {
    pub id: String,
    pub question: String,
    pub llm_answer: String,
    pub llm_latency_s: f64,
    pub agent_answer: String,
    pub agent_latency_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

fn check_latency(id: &str, field: &'static str, value: f64) -> Result<(), MemoryError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(MemoryError::NonPositiveLatency {
            id: id.to_string(),
            field,
            value,
        })
    }
}

impl ExperienceRecord {
    pub fn validate(&self) -> Result<(), MemoryError> {
        if self.question.trim().is_empty() {
            return Err(MemoryError::EmptyQuestion);
        }
        check_latency(&self.id, "llm_latency_s", self.llm_latency_s)?;
        check_latency(&self.id, "agent_latency_s", self.agent_latency_s)
    }
}

/// Builds a record from two solver runs on the same question.
///
/// Only the answers and latencies are copied; anything else a result might
/// carry stays behind.
pub fn record_experience(
    id: impl Into<String>,
    question: &str,
    llm: &SolverResult,
    agent: &SolverResult,
) -> Result<ExperienceRecord, MemoryError> {
    for (name, result) in [("LLM", llm), ("Agent", agent)] {
        if let Some(e) = &result.error {
            return Err(MemoryError::MissingAnswer {
                solver: name,
                reason: e.to_string(),
            });
        }
    }
    let record = ExperienceRecord {
        id: id.into(),
        question: question.to_string(),
        llm_answer: llm.answer.clone(),
        llm_latency_s: llm.latency_s,
        agent_answer: agent.answer.clone(),
        agent_latency_s: agent.latency_s,
        source: None,
        created_at: Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
    };
    record.validate()?;
    Ok(record)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Reject unknown keys instead of warning about them.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryMetadata {
    pub size: usize,
    pub sources: BTreeSet<String>,
    pub built_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryStats {
    pub count: usize,
    pub mean_llm_latency_s: Option<f64>,
    pub mean_agent_latency_s: Option<f64>,
    pub per_source: BTreeMap<String, usize>,
}

/// Append-only, ordered collection of experience records with unique ids.
#[derive(Debug, Clone)]
pub struct Memory {
    records: Vec<ExperienceRecord>,
    positions: HashMap<String, usize>,
    built_at: String,
}

impl PartialEq for Memory {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

impl Default for Memory {
    fn default() -> Self {
        Self::new()
    }
}

impl Memory {
    pub fn new() -> Self {
        Memory {
            records: Vec::new(),
            positions: HashMap::new(),
            built_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn from_records(records: impl IntoIterator<Item = ExperienceRecord>) -> Result<Self, MemoryError> {
        let mut memory = Memory::new();
        for record in records {
            memory.append(record)?;
        }
        Ok(memory)
    }

    pub fn append(&mut self, record: ExperienceRecord) -> Result<(), MemoryError> {
        record.validate()?;
        if self.positions.contains_key(&record.id) {
            return Err(MemoryError::DuplicateId(record.id));
        }
        self.positions.insert(record.id.clone(), self.records.len());
        self.records.push(record);
        Ok(())
    }

    /// Next auto-generated id, `exp-000000`, `exp-000001`, ...
    pub fn next_id(&self) -> String {
        format!("exp-{:06}", self.records.len())
    }

    pub fn get(&self, id: &str) -> Option<&ExperienceRecord> {
        self.positions.get(id).map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[ExperienceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn metadata(&self) -> MemoryMetadata {
        MemoryMetadata {
            size: self.records.len(),
            sources: self.records.iter().filter_map(|r| r.source.clone()).collect(),
            built_at: self.built_at.clone(),
        }
    }

    pub fn stats(&self) -> MemoryStats {
        let count = self.records.len();
        let mean = |f: fn(&ExperienceRecord) -> f64| (count > 0).then(|| self.records.iter().map(f).sum::<f64>() / count as f64);
        let mut per_source = BTreeMap::new();
        for source in self.records.iter().filter_map(|r| r.source.as_ref()) {
            *per_source.entry(source.clone()).or_insert(0) += 1;
        }
        MemoryStats {
            count,
            mean_llm_latency_s: mean(|r| r.llm_latency_s),
            mean_agent_latency_s: mean(|r| r.agent_latency_s),
            per_source,
        }
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> Result<(), MemoryError> {
        for record in &self.records {
            serde_json::to_writer(&mut out, record).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MemoryError> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_jsonl(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn read_jsonl(input: impl BufRead, options: LoadOptions) -> Result<Self, MemoryError> {
        let mut memory = Memory::new();
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            memory.append(parse_line(&line, line_no, options)?)?;
        }
        Ok(memory)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MemoryError> {
        Self::load_with(path, LoadOptions::default())
    }

    pub fn load_with(path: impl AsRef<Path>, options: LoadOptions) -> Result<Self, MemoryError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => MemoryError::FileNotFound(path.to_path_buf()),
            _ => MemoryError::Io(e),
        })?;
        Self::read_jsonl(BufReader::new(file), options)
    }
}

fn parse_line(line: &str, line_no: usize, options: LoadOptions) -> Result<ExperienceRecord, MemoryError> {
    let malformed = |reason: String| MemoryError::MalformedLine { line: line_no, reason };
    let value: Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    let Value::Object(object) = &value else {
        return Err(malformed("record must be a JSON object".into()));
    };
    if let Some(missing) = REQUIRED_KEYS.iter().find(|k| !object.contains_key(**k)) {
        return Err(malformed(format!("missing required key '{missing}'")));
    }
    for key in object.keys() {
        if REQUIRED_KEYS.contains(&key.as_str()) || OPTIONAL_KEYS.contains(&key.as_str()) {
            continue;
        }
        if options.strict {
            return Err(MemoryError::UnknownKey {
                line: line_no,
                key: key.clone(),
            });
        }
        tracing::warn!(line = line_no, "ignoring unknown key '{key}'");
    }
    serde_json::from_value(value).map_err(|e| malformed(e.to_string()))
}
