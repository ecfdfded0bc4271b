//! Benchmark instances and the JSONL bench file.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::judge::Judge;
use super::metrics::label_instance;
use super::EvalError;
use crate::memory::LoadOptions;
use crate::route::Route;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSet {
    Base,
    Rephrase,
    Advanced,
}

impl EvalSet {
    pub const ALL: [EvalSet; 3] = [EvalSet::Base, EvalSet::Rephrase, EvalSet::Advanced];

    pub fn as_str(self) -> &'static str {
        match self {
            EvalSet::Base => "base",
            EvalSet::Rephrase => "rephrase",
            EvalSet::Advanced => "advanced",
        }
    }
}

impl fmt::Display for EvalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EvalSet {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EvalSet::ALL
            .into_iter()
            .find(|set| set.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| EvalError::UnknownVocabulary {
                field: "set",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "GAIA")]
    Gaia,
    #[serde(rename = "MMLU")]
    Mmlu,
}

impl Source {
    pub const ALL: [Source; 2] = [Source::Gaia, Source::Mmlu];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Gaia => "GAIA",
            Source::Mmlu => "MMLU",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchInstance {
    pub id: String,
    pub set: EvalSet,
    pub source: Source,
    pub question: String,
    pub gold_answer: String,
    pub llm_answer: String,
    pub llm_latency_s: f64,
    pub agent_answer: String,
    pub agent_latency_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Route>,
}

const KEYS: [&str; 10] = [
    "id",
    "set",
    "source",
    "question",
    "gold_answer",
    "llm_answer",
    "llm_latency_s",
    "agent_answer",
    "agent_latency_s",
    "label",
];

impl BenchInstance {
    pub fn validate(&self) -> Result<(), EvalError> {
        for (field, value) in [("llm_latency_s", self.llm_latency_s), ("agent_latency_s", self.agent_latency_s)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(EvalError::NonPositiveLatency { field, value });
            }
        }
        Ok(())
    }

    pub fn llm_correct(&self, judge: &dyn Judge) -> bool {
        judge.is_correct(&self.llm_answer, &self.gold_answer)
    }

    pub fn agent_correct(&self, judge: &dyn Judge) -> bool {
        judge.is_correct(&self.agent_answer, &self.gold_answer)
    }

    /// Label recomputed from the stored answers, ignoring `label`.
    pub fn derive_label(&self, judge: &dyn Judge) -> Result<Route, EvalError> {
        label_instance(
            self.llm_correct(judge),
            self.agent_correct(judge),
            self.llm_latency_s,
            self.agent_latency_s,
        )
    }

    /// Stored label when present, derived otherwise.
    pub fn resolved_label(&self, judge: &dyn Judge) -> Result<Route, EvalError> {
        match self.label {
            Some(label) => Ok(label),
            None => self.derive_label(judge),
        }
    }

    /// Stored answer and latency of `route`'s solver.
    pub fn outcome(&self, route: Route) -> (&str, f64) {
        match route {
            Route::Llm => (&self.llm_answer, self.llm_latency_s),
            Route::Agent => (&self.agent_answer, self.agent_latency_s),
        }
    }
}

pub fn read_bench(input: impl BufRead, options: LoadOptions) -> Result<Vec<BenchInstance>, EvalError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| EvalError::MalformedLine { line: line_no, reason };
        let value: Value = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        let Value::Object(object) = &value else {
            return Err(malformed("instance must be a JSON object".into()));
        };
        for key in object.keys() {
            if KEYS.contains(&key.as_str()) {
                continue;
            }
            if options.strict {
                return Err(EvalError::UnknownKey {
                    line: line_no,
                    key: key.clone(),
                });
            }
            tracing::warn!(line = line_no, "ignoring unknown bench key '{key}'");
        }
        let instance: BenchInstance = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
        instance.validate().map_err(|e| malformed(e.to_string()))?;
        if !seen.insert(instance.id.clone()) {
            return Err(EvalError::DuplicateId(instance.id));
        }
        out.push(instance);
    }
    Ok(out)
}

pub fn load_bench(path: impl AsRef<Path>, options: LoadOptions) -> Result<Vec<BenchInstance>, EvalError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => EvalError::FileNotFound(path.to_path_buf()),
        _ => EvalError::Io(e),
    })?;
    read_bench(BufReader::new(file), options)
}

pub fn write_bench(instances: &[BenchInstance], mut out: impl Write) -> Result<(), EvalError> {
    for instance in instances {
        serde_json::to_writer(&mut out, instance).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::judge::ExactMatchJudge;
    use std::io::Cursor;

    pub(crate) fn instance(id: &str, gold: &str, llm: &str, agent: &str) -> BenchInstance {
        BenchInstance {
            id: id.into(),
            set: EvalSet::Base,
            source: Source::Mmlu,
            question: format!("question {id}"),
            gold_answer: gold.into(),
            llm_answer: llm.into(),
            llm_latency_s: 2.0,
            agent_answer: agent.into(),
            agent_latency_s: 100.0,
            label: None,
        }
    }

    #[test]
    fn round_trip() {
        let mut a = instance("1", "C", "(C)", "B");
        a.label = Some(Route::Agent);
        let b = instance("2", "Paris", "Lyon", "Paris");
        let mut buf = Vec::new();
        write_bench(&[a.clone(), b.clone()], &mut buf).unwrap();
        let back = read_bench(Cursor::new(buf), LoadOptions::default()).unwrap();
        assert_eq!(back, vec![a, b]);
    }

    #[test]
    fn vocabulary_is_closed() {
        let line = r#"{"id":"1","set":"hard","source":"MMLU","question":"q","gold_answer":"a","llm_answer":"a","llm_latency_s":1,"agent_answer":"a","agent_latency_s":2}"#;
        assert!(matches!(
            read_bench(Cursor::new(line), LoadOptions::default()),
            Err(EvalError::MalformedLine { line: 1, .. })
        ));
        assert!("Advanced".parse::<EvalSet>().is_ok());
        assert!("hard".parse::<EvalSet>().is_err());
    }

    #[test]
    fn rejects_bad_latency_and_duplicates() {
        let bad = r#"{"id":"1","set":"base","source":"GAIA","question":"q","gold_answer":"a","llm_answer":"a","llm_latency_s":0,"agent_answer":"a","agent_latency_s":2}"#;
        assert!(read_bench(Cursor::new(bad), LoadOptions::default()).is_err());
        let ok = bad.replace("\"llm_latency_s\":0", "\"llm_latency_s\":1");
        let twice = format!("{ok}\n{ok}\n");
        assert!(matches!(
            read_bench(Cursor::new(twice), LoadOptions::default()),
            Err(EvalError::DuplicateId(_))
        ));
    }

    #[test]
    fn strict_mode_rejects_extra_keys() {
        let line = r#"{"id":"1","set":"base","source":"GAIA","question":"q","gold_answer":"a","llm_answer":"a","llm_latency_s":1,"agent_answer":"a","agent_latency_s":2,"notes":"x"}"#;
        assert!(read_bench(Cursor::new(line), LoadOptions::default()).is_ok());
        assert!(matches!(
            read_bench(Cursor::new(line), LoadOptions { strict: true }),
            Err(EvalError::UnknownKey { .. })
        ));
    }

    #[test]
    fn labels_resolve_and_derive() {
        let judge = ExactMatchJudge;
        let both = instance("1", "Paris", "paris", "Paris.");
        assert_eq!(both.derive_label(&judge).unwrap(), Route::Llm);
        let mut stored = both.clone();
        stored.label = Some(Route::Agent);
        assert_eq!(stored.resolved_label(&judge).unwrap(), Route::Agent);
        let none = instance("2", "Paris", "Lyon", "Rome");
        assert_eq!(none.derive_label(&judge).unwrap(), Route::Agent);
    }
}
