//! HTTP front end: routing decisions, routed answers, counters and health.
//!
//! The core is synchronous, so every router or solver call runs on the
//! blocking pool under the configured request timeout. Memory and index are
//! loaded once at startup; `/v1/health` reports `starting` until they are.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Json;
use routegate_core::config::AppConfig;
use routegate_core::memory::MemoryStats;
use routegate_core::retrieval::RetrievalConfig;
use routegate_core::setup::{self, SetupError};
use routegate_core::solvers::{execute_route, AgentBackend, ChatBackend, ExecuteOptions};
use routegate_core::{Route, Router, RoutingDecision, RoutingError, Strategy};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::Notify;

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("service.listen '{0}' is not a socket address")]
    Listen(String),
    #[error(transparent)]
    Setup(#[from] SetupError),
    #[error("startup task failed: {0}")]
    Startup(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Everything a request needs once startup has finished.
pub struct Services {
    router: Router,
    llm: Arc<dyn ChatBackend>,
    agent: Arc<dyn AgentBackend>,
    execute: ExecuteOptions,
    memory_stats: Option<MemoryStats>,
    index_config: Option<RetrievalConfig>,
}

impl Services {
    pub fn new(router: Router, llm: Arc<dyn ChatBackend>, agent: Arc<dyn AgentBackend>) -> Self {
        Services {
            memory_stats: router.memory().map(|m| m.stats()),
            index_config: router.index().map(|i| i.config().clone()),
            router,
            llm,
            agent,
            execute: ExecuteOptions::default(),
        }
    }

    pub fn with_execute_options(mut self, execute: ExecuteOptions) -> Self {
        self.execute = execute;
        self
    }

    /// Loads memory and index and builds the HTTP backends.
    pub fn from_config(config: &AppConfig) -> Result<Self, GatewayError> {
        let components = setup::load_components(config)?;
        setup::require_memory_for(config, &components)?;
        let router = setup::build_router(config, &components, setup::router_backend(config))?;
        let agent: Arc<dyn AgentBackend> = setup::agent_backend(config);
        Ok(Services::new(router, setup::llm_backend(config), agent).with_execute_options(config.execute_options()))
    }
}

#[derive(Debug, Default)]
struct Counters {
    route_requests: AtomicU64,
    answer_requests: AtomicU64,
    errors: AtomicU64,
    routed_llm: AtomicU64,
    routed_agent: AtomicU64,
    fallbacks: AtomicU64,
}

impl Counters {
    fn bump(counter: &AtomicU64) {
        counter.fetch_add(1, Ordering::Relaxed);
    }

    fn record(&self, decision: &RoutingDecision) {
        match decision.route {
            Route::Llm => Self::bump(&self.routed_llm),
            Route::Agent => Self::bump(&self.routed_agent),
        }
        if decision.fallback_used {
            Self::bump(&self.fallbacks);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSnapshot {
    pub route_requests: u64,
    pub answer_requests: u64,
    pub errors: u64,
    pub routed_llm: u64,
    pub routed_agent: u64,
    pub fallbacks: u64,
}

pub struct Gateway {
    services: OnceLock<Services>,
    startup_error: Mutex<Option<String>>,
    counters: Counters,
    request_timeout: Duration,
}

impl Gateway {
    /// A gateway that answers `starting` until [`Gateway::install`] is called.
    pub fn starting(request_timeout: Duration) -> Arc<Self> {
        Arc::new(Gateway {
            services: OnceLock::new(),
            startup_error: Mutex::new(None),
            counters: Counters::default(),
            request_timeout,
        })
    }

    pub fn ready(services: Services, request_timeout: Duration) -> Arc<Self> {
        let gateway = Self::starting(request_timeout);
        gateway.install(services);
        gateway
    }

    pub fn install(&self, services: Services) {
        if self.services.set(services).is_err() {
            tracing::warn!("services already installed; ignoring");
        }
    }

    pub fn fail_startup(&self, reason: String) {
        *self.startup_error.lock().unwrap_or_else(|e| e.into_inner()) = Some(reason);
    }

    pub fn is_ready(&self) -> bool {
        self.services.get().is_some()
    }

    pub fn counters(&self) -> CounterSnapshot {
        let c = &self.counters;
        let get = |a: &AtomicU64| a.load(Ordering::Relaxed);
        CounterSnapshot {
            route_requests: get(&c.route_requests),
            answer_requests: get(&c.answer_requests),
            errors: get(&c.errors),
            routed_llm: get(&c.routed_llm),
            routed_agent: get(&c.routed_agent),
            fallbacks: get(&c.fallbacks),
        }
    }

    fn services(&self) -> Result<&Services, ApiError> {
        self.services
            .get()
            .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "service is still loading"))
    }

    async fn blocking<T, F>(self: &Arc<Self>, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&Services) -> T + Send + 'static,
    {
        self.services()?;
        let me = self.clone();
        let task = tokio::task::spawn_blocking(move || {
            let services = me.services.get().expect("checked above");
            f(services)
        });
        match tokio::time::timeout(self.request_timeout, task).await {
            Err(_) => Err(ApiError::new(StatusCode::GATEWAY_TIMEOUT, "request timed out")),
            Ok(Err(join)) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("worker failed: {join}"))),
            Ok(Ok(v)) => Ok(v),
        }
    }
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": message.into() }),
        }
    }

    fn from_routing(err: RoutingError) -> Self {
        let status = match &err {
            RoutingError::BackendUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            RoutingError::IndexMissing(_) | RoutingError::UnknownStrategy(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, err.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

#[derive(Debug, Deserialize)]
pub struct RouteRequest {
    pub question: String,
    #[serde(default)]
    pub strategy: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RetrievedSummary {
    pub id: String,
    pub fused_score: f64,
    pub rank: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RouteResponse {
    pub route: Route,
    pub strategy: Strategy,
    pub rationale: String,
    pub retrieved: Vec<RetrievedSummary>,
    pub router_latency_s: f64,
    pub fallback_used: bool,
}

impl From<&RoutingDecision> for RouteResponse {
    fn from(d: &RoutingDecision) -> Self {
        RouteResponse {
            route: d.route,
            strategy: d.strategy,
            rationale: d.rationale.clone(),
            retrieved: d
                .retrieved
                .iter()
                .map(|c| RetrievedSummary {
                    id: c.id.clone(),
                    fused_score: c.fused_score,
                    rank: c.rank,
                })
                .collect(),
            router_latency_s: d.router_latency_s,
            fallback_used: d.fallback_used,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnswerResponse {
    pub route: Route,
    pub answer: String,
    pub solver_latency_s: f64,
    pub router_latency_s: f64,
    pub fallback_used: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u32>,
}

fn parse_request(req: &RouteRequest) -> Result<(String, Option<Strategy>), ApiError> {
    let question = req.question.trim();
    if question.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "question must not be empty"));
    }
    let strategy = req
        .strategy
        .as_deref()
        .map(str::parse::<Strategy>)
        .transpose()
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    Ok((question.to_string(), strategy))
}

fn counted<T>(gateway: &Gateway, result: Result<T, ApiError>) -> Result<T, ApiError> {
    if result.is_err() {
        Counters::bump(&gateway.counters.errors);
    }
    result
}

async fn handle_route(State(gateway): State<Arc<Gateway>>, Json(req): Json<RouteRequest>) -> Result<Json<RouteResponse>, ApiError> {
    Counters::bump(&gateway.counters.route_requests);
    let result = async {
        let (question, strategy) = parse_request(&req)?;
        let decision = gateway
            .blocking(move |s| s.router.decide_with(&question, strategy))
            .await?
            .map_err(ApiError::from_routing)?;
        gateway.counters.record(&decision);
        Ok(Json(RouteResponse::from(&decision)))
    }
    .await;
    counted(&gateway, result)
}

async fn handle_answer(State(gateway): State<Arc<Gateway>>, Json(req): Json<RouteRequest>) -> Result<Json<AnswerResponse>, ApiError> {
    Counters::bump(&gateway.counters.answer_requests);
    let result = async {
        let (question, strategy) = parse_request(&req)?;
        let g = gateway.clone();
        let (decision, solved) = gateway
            .blocking(move |s| {
                let decision = s.router.decide_with(&question, strategy)?;
                g.counters.record(&decision);
                let started = Instant::now();
                let result = execute_route(&question, &decision, s.llm.as_ref(), s.agent.as_ref(), s.execute);
                tracing::debug!(route = %decision.route, elapsed_s = started.elapsed().as_secs_f64(), "solver finished");
                Ok::<_, RoutingError>((decision, result))
            })
            .await?
            .map_err(ApiError::from_routing)?;
        if let Some(error) = &solved.error {
            return Err(ApiError {
                status: StatusCode::BAD_GATEWAY,
                body: json!({
                    "error": format!("{} solver failed: {error}", solved.solver),
                    "kind": error,
                    "route": decision.route,
                    "decision": RouteResponse::from(&decision),
                }),
            });
        }
        Ok(Json(AnswerResponse {
            route: decision.route,
            answer: solved.answer,
            solver_latency_s: solved.latency_s,
            router_latency_s: decision.router_latency_s,
            fallback_used: decision.fallback_used,
            steps: solved.steps,
        }))
    }
    .await;
    counted(&gateway, result)
}

async fn handle_stats(State(gateway): State<Arc<Gateway>>) -> Json<Value> {
    let services = gateway.services.get();
    let c = gateway.counters();
    Json(json!({
        "ready": services.is_some(),
        "memory": services.and_then(|s| s.memory_stats.clone()),
        "index": services.and_then(|s| s.index_config.clone()),
        "strategy": services.map(|s| s.router.settings().strategy),
        "requests": { "route": c.route_requests, "answer": c.answer_requests, "errors": c.errors },
        "routes": { "LLM": c.routed_llm, "Agent": c.routed_agent },
        "fallbacks": c.fallbacks,
    }))
}

async fn handle_health(State(gateway): State<Arc<Gateway>>) -> (StatusCode, Json<Value>) {
    if gateway.is_ready() {
        return (StatusCode::OK, Json(json!({ "status": "ready" })));
    }
    let error = gateway.startup_error.lock().unwrap_or_else(|e| e.into_inner()).clone();
    let body = match error {
        Some(e) => json!({ "status": "failed", "error": e }),
        None => json!({ "status": "starting" }),
    };
    (StatusCode::SERVICE_UNAVAILABLE, Json(body))
}

pub fn app(gateway: Arc<Gateway>) -> axum::Router {
    axum::Router::new()
        .route("/v1/route", post(handle_route))
        .route("/v1/answer", post(handle_answer))
        .route("/v1/stats", get(handle_stats))
        .route("/v1/health", get(handle_health))
        .with_state(gateway)
}

async fn ctrl_c() {
    if let Err(e) = tokio::signal::ctrl_c().await {
        tracing::warn!("cannot listen for ctrl-c: {e}");
        std::future::pending::<()>().await;
    }
}

/// Binds `service.listen`, loads memory and index in the background and
/// serves until ctrl-c. A failed load stops the server with an error.
pub async fn serve(config: AppConfig) -> Result<(), GatewayError> {
    let addr: SocketAddr = config
        .service
        .listen
        .parse()
        .map_err(|_| GatewayError::Listen(config.service.listen.clone()))?;
    let listener = TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    let gateway = Gateway::starting(Duration::from_secs_f64(config.service.request_timeout_s));

    let stop = Arc::new(Notify::new());
    let stop_server = stop.clone();
    let server_app = app(gateway.clone());
    let server = tokio::spawn(async move {
        axum::serve(listener, server_app)
            .with_graceful_shutdown(async move {
                tokio::select! {
                    _ = ctrl_c() => tracing::info!("shutting down"),
                    _ = stop_server.notified() => {}
                }
            })
            .await
    });

    let loaded = tokio::task::spawn_blocking(move || Services::from_config(&config)).await;
    match loaded {
        Ok(Ok(services)) => {
            gateway.install(services);
            tracing::info!("ready");
        }
        Ok(Err(e)) => {
            gateway.fail_startup(e.to_string());
            stop.notify_one();
            let _ = server.await;
            return Err(e);
        }
        Err(join) => {
            stop.notify_one();
            let _ = server.await;
            return Err(GatewayError::Startup(join.to_string()));
        }
    }
    server
        .await
        .map_err(|e| GatewayError::Startup(e.to_string()))?
        .map_err(GatewayError::Io)
}
