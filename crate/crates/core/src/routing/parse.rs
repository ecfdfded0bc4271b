//! Extracting a route from the routing model's completion.
//!
//! `YES` means "use the agent", `NO` means "use the LLM".

use super::Strategy;
use crate::route::Route;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no routing decision found in completion")]
pub struct ParseFailure;

const MARKER: &str = "final answer";

fn word_to_route(word: &str) -> Option<Route> {
    match word.to_ascii_lowercase().as_str() {
        "yes" => Some(Route::Agent),
        "no" => Some(Route::Llm),
        _ => None,
    }
}

/// Chain-of-thought strategies: the last `FINAL ANSWER:` wins.
fn parse_final_answer(completion: &str) -> Result<Route, ParseFailure> {
    // ASCII lowercasing keeps byte offsets aligned with the original.
    let lower = completion.to_ascii_lowercase();
    let tail = lower
        .rmatch_indices(MARKER)
        .find_map(|(at, _)| {
            let after = lower[at + MARKER.len()..].trim_start_matches([' ', '\t']);
            after.strip_prefix(':')
        })
        .ok_or(ParseFailure)?;
    let value = tail.trim_start_matches(|c: char| c.is_whitespace() || matches!(c, '[' | '(' | '"' | '\'' | '*' | '`' | '<' | '{'));
    let word_len = value.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(value.len());
    word_to_route(&value[..word_len]).ok_or(ParseFailure)
}

/// Direct-answer strategies: exactly one of the words YES / NO must appear.
fn parse_bare(completion: &str) -> Result<Route, ParseFailure> {
    let mut found: Option<Route> = None;
    for word in completion.split(|c: char| !c.is_alphabetic()) {
        if let Some(route) = word_to_route(word) {
            match found {
                Some(prev) if prev != route => return Err(ParseFailure),
                _ => found = Some(route),
            }
        }
    }
    found.ok_or(ParseFailure)
}

pub fn parse_decision(completion: &str, strategy: Strategy) -> Result<Route, ParseFailure> {
    match strategy {
        Strategy::RegularCot | Strategy::RubricCot => parse_final_answer(completion),
        Strategy::PromptOnly | Strategy::RagDirect => parse_bare(completion),
    }
}
