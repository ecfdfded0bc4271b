mod common;

use common::fixtures::{golden_records, parser_cases};
use routegate_core::retrieval::build_index;
use routegate_core::routing::{decide_route, parse_decision, RouterSettings};
use routegate_core::solvers::mock::MockChat;
use routegate_core::{Memory, Route};

fn expected(tag: &str) -> Option<Route> {
    match tag {
        "fail" => None,
        other => Some(other.parse().unwrap()),
    }
}

#[test]
fn fixture_suite_has_at_least_twenty_cases() {
    assert!(parser_cases().len() >= 20);
}

#[test]
fn every_fixture_parses_per_contract() {
    for case in parser_cases() {
        let got = parse_decision(&case.completion, case.strategy).ok();
        assert_eq!(got, expected(&case.expect), "{:?} / {:?}", case.strategy, case.completion);
    }
}

#[test]
fn unparseable_completions_fall_back_to_agent() {
    let memory = Memory::from_records(golden_records()).unwrap();
    let index = build_index(&memory, &Default::default()).unwrap();
    let settings = RouterSettings::default();
    let mut failures = 0;
    for case in parser_cases().into_iter().filter(|c| c.expect == "fail") {
        let chat = MockChat::fixed(case.completion.clone());
        let d = decide_route("What is 2+2?", case.strategy, Some(&index), Some(&memory), &chat, &settings).unwrap();
        assert_eq!(d.route, Route::Agent, "{:?}", case.completion);
        assert!(d.fallback_used);
        assert_eq!(chat.calls(), 1 + settings.parse_retries as usize);
        failures += 1;
    }
    assert!(failures >= 5);
}

#[test]
fn parseable_completions_do_not_fall_back() {
    let memory = Memory::from_records(golden_records()).unwrap();
    let index = build_index(&memory, &Default::default()).unwrap();
    for case in parser_cases().into_iter().filter(|c| c.expect != "fail") {
        let chat = MockChat::fixed(case.completion.clone());
        let d = decide_route(
            "What is 2+2?",
            case.strategy,
            Some(&index),
            Some(&memory),
            &chat,
            &RouterSettings::default(),
        )
        .unwrap();
        assert_eq!(Some(d.route), expected(&case.expect));
        assert!(!d.fallback_used);
        assert_eq!(chat.calls(), 1);
    }
}
