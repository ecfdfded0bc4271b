use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use routegate_core::retrieval::build_index;
use routegate_core::solvers::mock::{MockAgent, MockChat};
use routegate_core::{BackendError, ExperienceRecord, Memory, Router, RouterSettings};
use routegate_gateway::{app, Gateway, Services};
use serde_json::{json, Value};
use tower::ServiceExt;

const TIMEOUT: Duration = Duration::from_secs(30);

fn memory() -> Memory {
    let record = |id: &str, q: &str| ExperienceRecord {
        id: id.into(),
        question: q.into(),
        llm_answer: "4".into(),
        llm_latency_s: 1.2,
        agent_answer: "The answer is 4.".into(),
        agent_latency_s: 95.0,
        source: None,
        created_at: None,
    };
    Memory::from_records([
        record("exp-000001", "What is 2 + 2?"),
        record("exp-000002", "Who wrote the novel Dune?"),
        record("exp-000003", "What is the boiling point of water in Kelvin?"),
    ])
    .unwrap()
}

fn router(chat: MockChat) -> Router {
    let memory = memory();
    let index = build_index(&memory, &Default::default()).unwrap();
    Router::new(
        Some(Arc::new(memory)),
        Some(Arc::new(index)),
        Arc::new(chat),
        RouterSettings::default(),
    )
}

fn gateway(chat: MockChat, llm: MockChat, agent: MockAgent) -> Arc<Gateway> {
    Gateway::ready(Services::new(router(chat), Arc::new(llm), Arc::new(agent)), TIMEOUT)
}

fn llm_router() -> MockChat {
    MockChat::fixed("Simple arithmetic.\nFINAL ANSWER: NO # use LLM")
}

fn agent_router() -> MockChat {
    MockChat::fixed("Needs a lookup.\nFINAL ANSWER: YES # use Agent")
}

async fn call(gateway: &Arc<Gateway>, method: &str, path: &str, body: Option<Value>) -> (StatusCode, Value) {
    let builder = Request::builder().method(method).uri(path);
    let request = match body {
        Some(b) => builder
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => builder.body(Body::empty()).unwrap(),
    };
    let response = app(gateway.clone()).oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

#[tokio::test]
async fn route_returns_llm_decision_with_retrieved_cases() {
    let g = gateway(llm_router(), MockChat::fixed("4"), MockAgent::fixed("4"));
    let (status, body) = call(&g, "POST", "/v1/route", Some(json!({"question": "What is 3 + 3?"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["route"], "LLM");
    assert_eq!(body["strategy"], "rubric_cot");
    assert_eq!(body["fallback_used"], false);
    let retrieved = body["retrieved"].as_array().unwrap();
    assert_eq!(retrieved.len(), 3);
    assert_eq!(retrieved[0]["rank"], 1);
    assert_eq!(retrieved[0]["id"], "exp-000001");
}

#[tokio::test]
async fn strategy_override_without_retrieval() {
    let g = gateway(llm_router(), MockChat::fixed("4"), MockAgent::fixed("4"));
    let (status, body) = call(
        &g,
        "POST",
        "/v1/route",
        Some(json!({"question": "What is 3 + 3?", "strategy": "prompt_only"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["strategy"], "prompt_only");
    assert!(body["retrieved"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn bad_requests_are_rejected() {
    let g = gateway(llm_router(), MockChat::fixed("4"), MockAgent::fixed("4"));
    let (status, body) = call(&g, "POST", "/v1/route", Some(json!({"question": "   "}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("empty"));

    let (status, _) = call(&g, "POST", "/v1/route", Some(json!({"question": "q", "strategy": "vibes"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    assert_eq!(g.counters().errors, 2);
}

#[tokio::test]
async fn answer_dispatches_to_the_llm_only() {
    let llm = Arc::new(MockChat::fixed("6"));
    let agent = Arc::new(MockAgent::fixed("six"));
    let services = Services::new(router(llm_router()), llm.clone(), agent.clone());
    let g = Gateway::ready(services, TIMEOUT);
    let (status, body) = call(&g, "POST", "/v1/answer", Some(json!({"question": "What is 3 + 3?"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["route"], "LLM");
    assert_eq!(body["answer"], "6");
    assert_eq!(llm.calls(), 1);
    assert_eq!(agent.calls(), 0);
}

#[tokio::test]
async fn answer_via_agent_reports_solver_latency() {
    let agent = MockAgent::fixed("Frank Herbert").with_delay(Duration::from_millis(120));
    let g = gateway(agent_router(), MockChat::fixed("unused"), agent);
    let (status, body) = call(&g, "POST", "/v1/answer", Some(json!({"question": "Who wrote Dune?"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["route"], "Agent");
    assert_eq!(body["answer"], "Frank Herbert");
    assert_eq!(body["steps"], 3);
    assert!(body["solver_latency_s"].as_f64().unwrap() >= 0.12);
}

#[tokio::test]
async fn agent_failure_is_a_bad_gateway_with_the_decision() {
    let agent = MockAgent::failing(BackendError::Transport {
        message: "connection refused".into(),
    });
    let g = gateway(agent_router(), MockChat::fixed("unused"), agent);
    let (status, body) = call(&g, "POST", "/v1/answer", Some(json!({"question": "Who wrote Dune?"}))).await;
    assert_eq!(status, StatusCode::BAD_GATEWAY);
    assert_eq!(body["route"], "Agent");
    assert_eq!(body["decision"]["route"], "Agent");
    assert!(body["error"].as_str().unwrap().contains("connection refused"));
    assert_eq!(g.counters().errors, 1);
}

#[tokio::test]
async fn routing_backend_down_is_service_unavailable() {
    let chat = MockChat::failing(BackendError::Transport {
        message: "no route to host".into(),
    });
    let g = gateway(chat, MockChat::fixed("4"), MockAgent::fixed("4"));
    let (status, _) = call(&g, "POST", "/v1/route", Some(json!({"question": "What is 3 + 3?"}))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
}

#[tokio::test]
async fn stats_track_routes_and_fallbacks() {
    let chat = MockChat::sequence(vec![
        Ok("FINAL ANSWER: NO".into()),
        Ok("FINAL ANSWER: YES".into()),
        Ok("no verdict".into()),
        Ok("still no verdict".into()),
    ]);
    let g = gateway(chat, MockChat::fixed("4"), MockAgent::fixed("4"));

    let (status, stats) = call(&g, "GET", "/v1/stats", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(stats["requests"]["route"], 0);
    assert_eq!(stats["memory"]["count"], 3);

    let mut routes = Vec::new();
    for q in ["a?", "b?", "c?"] {
        let (status, body) = call(&g, "POST", "/v1/route", Some(json!({"question": q}))).await;
        assert_eq!(status, StatusCode::OK);
        routes.push((body["route"].clone(), body["fallback_used"].clone()));
    }
    assert_eq!(routes[0], (json!("LLM"), json!(false)));
    assert_eq!(routes[1], (json!("Agent"), json!(false)));
    assert_eq!(routes[2], (json!("Agent"), json!(true)));

    let (_, stats) = call(&g, "GET", "/v1/stats", None).await;
    assert_eq!(stats["requests"]["route"], 3);
    assert_eq!(stats["routes"]["LLM"], 1);
    assert_eq!(stats["routes"]["Agent"], 2);
    assert_eq!(stats["fallbacks"], 1);
    assert_eq!(stats["requests"]["errors"], 0);
}

#[tokio::test]
async fn health_reflects_startup_state() {
    let g = Gateway::starting(TIMEOUT);
    let (status, body) = call(&g, "GET", "/v1/health", None).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["status"], "starting");

    let (status, _) = call(&g, "POST", "/v1/route", Some(json!({"question": "q"}))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);

    g.install(Services::new(
        router(llm_router()),
        Arc::new(MockChat::fixed("4")),
        Arc::new(MockAgent::fixed("4")),
    ));
    let (status, body) = call(&g, "GET", "/v1/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ready");
}

#[tokio::test]
async fn failed_startup_is_reported() {
    let g = Gateway::starting(TIMEOUT);
    g.fail_startup("memory file not found: missing.jsonl".into());
    let (status, body) = call(&g, "GET", "/v1/health", None).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["status"], "failed");
}

#[tokio::test]
async fn slow_requests_time_out() {
    let chat = MockChat::fixed("FINAL ANSWER: NO").with_delay(Duration::from_millis(500));
    let services = Services::new(router(chat), Arc::new(MockChat::fixed("4")), Arc::new(MockAgent::fixed("4")));
    let g = Gateway::ready(services, Duration::from_millis(50));
    let (status, _) = call(&g, "POST", "/v1/route", Some(json!({"question": "q"}))).await;
    assert_eq!(status, StatusCode::GATEWAY_TIMEOUT);
}
