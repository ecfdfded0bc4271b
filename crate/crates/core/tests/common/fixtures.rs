use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use routegate_core::eval::{label_instance, BenchInstance, EvalSet, Source};
use routegate_core::retrieval::RetrievedCase;
use routegate_core::routing::{RouterSettings, Strategy};
use routegate_core::solvers::mock::MockChat;
use routegate_core::{ExperienceRecord, Memory, Route, Router};

pub fn golden_query() -> &'static str {
    "Which planet has the most moons?"
}

pub fn golden_records() -> Vec<ExperienceRecord> {
    vec![
        ExperienceRecord {
            id: "exp-000001".into(),
            question: "How many moons does Jupiter have?".into(),
            llm_answer: "95".into(),
            llm_latency_s: 2.13,
            agent_answer: "Jupiter has 95 confirmed moons.".into(),
            agent_latency_s: 123.94,
            source: None,
            created_at: None,
        },
        ExperienceRecord {
            id: "exp-000002".into(),
            question: "Solve x^2 - 5x + 6 = 0 and explain each step.".into(),
            llm_answer: "x = 2 or x = 3".into(),
            llm_latency_s: 1.04,
            agent_answer: "Factor: (x-2)(x-3)=0, so x=2 or x=3.".into(),
            agent_latency_s: 48.66,
            source: None,
            created_at: None,
        },
    ]
}

fn case(id: &str, rank: usize) -> RetrievedCase {
    RetrievedCase {
        id: id.into(),
        sparse_score: 0.0,
        dense_score: 0.0,
        fused_score: 0.0,
        rank,
    }
}

/// `(golden file stem, strategy, with examples?)`.
pub const GOLDEN_CASES: [(&str, Strategy, bool); 6] = [
    ("prompt_only", Strategy::PromptOnly, false),
    ("rag_direct", Strategy::RagDirect, true),
    ("rag_direct_empty", Strategy::RagDirect, false),
    ("regular_cot", Strategy::RegularCot, true),
    ("rubric_cot", Strategy::RubricCot, true),
    ("rubric_cot_empty", Strategy::RubricCot, false),
];

/// Renders one golden case. Cases are passed out of rank order on purpose.
pub fn render_golden(strategy: Strategy, with_examples: bool) -> String {
    let records = golden_records();
    let retrieved: Vec<(RetrievedCase, &ExperienceRecord)> = if with_examples {
        vec![(case("exp-000002", 2), &records[1]), (case("exp-000001", 1), &records[0])]
    } else {
        vec![]
    };
    let templates = routegate_core::routing::PromptTemplates::builtin();
    routegate_core::routing::render_prompt(&templates, strategy, golden_query(), &retrieved, 1000).unwrap()
}

pub fn golden_path(stem: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{stem}.txt"))
}

#[derive(Debug, serde::Deserialize)]
pub struct ParserCase {
    pub strategy: Strategy,
    pub completion: String,
    /// `"LLM"`, `"Agent"` or `"fail"`.
    pub expect: String,
}

pub fn parser_cases() -> Vec<ParserCase> {
    include_str!("../fixtures/parser_cases.jsonl")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

const WORDS: [&str; 40] = [
    "capital",
    "france",
    "integral",
    "derivative",
    "protein",
    "cell",
    "orbit",
    "moon",
    "planet",
    "river",
    "population",
    "census",
    "python",
    "compile",
    "error",
    "matrix",
    "vector",
    "eigen",
    "history",
    "empire",
    "revolution",
    "chemistry",
    "bond",
    "acid",
    "quantum",
    "spin",
    "market",
    "price",
    "inflation",
    "poem",
    "novel",
    "author",
    "museum",
    "painting",
    "gene",
    "virus",
    "climate",
    "ocean",
    "tax",
    "law",
];

pub fn random_question(rng: &mut ChaCha8Rng, min: usize, max: usize) -> String {
    let n = rng.random_range(min..=max);
    let words: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect();
    let mut q = words.join(" ");
    if rng.random_bool(0.3) {
        q.push('?');
    }
    q
}

fn random_answer(rng: &mut ChaCha8Rng) -> String {
    const PIECES: [&str; 6] = ["42", "Paris", "(C) option", "multi\nline answer", "ünïcödé ✓", "\"quoted\" \\ text"];
    let mut s = PIECES.choose(rng).unwrap().to_string();
    if rng.random_bool(0.1) {
        s = s.repeat(rng.random_range(1..200));
    }
    s
}

pub fn random_record(rng: &mut ChaCha8Rng, id: String) -> ExperienceRecord {
    ExperienceRecord {
        id,
        question: random_question(rng, 1, 12),
        llm_answer: random_answer(rng),
        llm_latency_s: rng.random_range(0.05..30.0),
        agent_answer: random_answer(rng),
        agent_latency_s: rng.random_range(10.0..900.0),
        source: if rng.random_bool(0.5) {
            Some(["GAIA", "MMLU"].choose(rng).unwrap().to_string())
        } else {
            None
        },
        created_at: if rng.random_bool(0.5) {
            Some("2026-01-02T03:04:05Z".into())
        } else {
            None
        },
    }
}

pub fn random_memory(rng: &mut ChaCha8Rng, max_n: usize) -> Memory {
    let n = rng.random_range(1..=max_n);
    Memory::from_records((0..n).map(|i| random_record(rng, format!("exp-{i:06}")))).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 40 instances over all three sets and both sources, with LLM latencies of
/// a few seconds and agent latencies of minutes.
pub fn synthetic_bench(seed: u64) -> Vec<BenchInstance> {
    let mut rng = rng(seed);
    (0..40)
        .map(|i| {
            let set = EvalSet::ALL[i % 3];
            let source = if i % 2 == 0 { Source::Mmlu } else { Source::Gaia };
            let gold = format!("answer {i}");
            let (llm_ok, agent_ok) = match (i / 6) % 4 {
                0 => (true, true),
                1 => (false, true),
                2 => (true, false),
                _ => (false, false),
            };
            let t_llm = rng.random_range(0.5..9.0);
            let t_agent = rng.random_range(100.0..450.0);
            BenchInstance {
                id: format!("inst-{i:03}"),
                set,
                source,
                question: format!("{} (case {i})", random_question(&mut rng, 3, 10)),
                gold_answer: gold.clone(),
                llm_answer: if llm_ok { gold.clone() } else { "wrong".into() },
                llm_latency_s: t_llm,
                agent_answer: if agent_ok { gold.clone() } else { "also wrong".into() },
                agent_latency_s: t_agent,
                label: Some(label_instance(llm_ok, agent_ok, t_llm, t_agent).unwrap()),
            }
        })
        .collect()
}

fn original_question(prompt: &str) -> Option<&str> {
    prompt
        .lines()
        .find_map(|l| l.strip_prefix("Original question: ").or_else(|| l.strip_prefix("Question: ")))
}

/// A real [`Router`] whose routing model answers from a script keyed by the
/// question in the prompt; unknown questions get `default`.
pub fn scripted_router(script: HashMap<String, Route>, default: Route, memory: Memory) -> Router {
    let chat = MockChat::from_fn(move |prompt| {
        let q = original_question(prompt).unwrap_or_default();
        let route = script.get(q).copied().unwrap_or(default);
        Ok(match route {
            Route::Agent => "Reasoning...\nFINAL ANSWER: YES # use Agent".to_string(),
            Route::Llm => "Reasoning...\nFINAL ANSWER: NO # use LLM".to_string(),
        })
    });
    let index = routegate_core::retrieval::build_index(&memory, &Default::default()).unwrap();
    Router::new(
        Some(Arc::new(memory)),
        Some(Arc::new(index)),
        Arc::new(chat),
        RouterSettings::default(),
    )
}
