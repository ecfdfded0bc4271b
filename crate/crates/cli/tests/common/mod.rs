#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use routegate_core::eval::{load_bench, ExactMatchJudge};
use routegate_core::memory::LoadOptions;
use routegate_core::solvers::mock::MockChat;
use routegate_core::Route;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// The question a routing prompt is about.
pub fn prompt_question(prompt: &str) -> Option<&str> {
    let find = |prefix: &str| prompt.lines().find_map(|l| l.strip_prefix(prefix)).map(str::trim);
    find("Original question: ").or_else(|| find("Question: "))
}

pub fn verdict(route: Route) -> &'static str {
    match route {
        Route::Agent => "The case needs tools.\nFINAL ANSWER: YES",
        Route::Llm => "A direct answer suffices.\nFINAL ANSWER: NO",
    }
}

/// Ground-truth label for every question of a bench file.
pub fn bench_labels(name: &str) -> HashMap<String, Route> {
    load_bench(fixture(name), LoadOptions::default())
        .unwrap()
        .into_iter()
        .map(|i| {
            let label = i.resolved_label(&ExactMatchJudge).unwrap();
            (i.question, label)
        })
        .collect()
}

/// A routing model that answers with the bench label of the question.
pub fn oracle_chat(labels: HashMap<String, Route>) -> MockChat {
    MockChat::from_fn(move |prompt| {
        let q = prompt_question(prompt).unwrap_or_default();
        Ok(verdict(labels.get(q).copied().unwrap_or(Route::Agent)).to_string())
    })
}
