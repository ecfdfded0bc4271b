//! Blocking HTTP clients for the OpenAI-compatible chat endpoint and the
//! agent endpoint.
//!
//! Agent wire contract: `POST <url>` with `{"question": "..."}`, answered by
//! `{"answer": "...", "steps": <optional integer>}`.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::limit::InflightLimiter;
use super::{AgentBackend, AgentReply, BackendError, ChatBackend};

/// Connection settings for an OpenAI-compatible chat endpoint.
///
/// The credential is referenced by environment-variable name and read at
/// call time; the secret itself is never stored here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatBackendConfig {
    /// e.g. `https://api.openai.com/v1`; `/chat/completions` is appended.
    pub base_url: String,
    pub model: String,
    pub api_key_env: Option<String>,
    pub timeout_s: f64,
    pub max_retries: u32,
    pub retry_backoff_ms: u64,
    pub temperature: f64,
    pub system_prompt: Option<String>,
    pub max_inflight: usize,
}

impl Default for ChatBackendConfig {
    fn default() -> Self {
        ChatBackendConfig {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            api_key_env: Some("OPENAI_API_KEY".into()),
            timeout_s: 60.0,
            max_retries: 2,
            retry_backoff_ms: 500,
            temperature: 0.0,
            system_prompt: None,
            max_inflight: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentEndpointConfig {
    pub url: String,
    pub timeout_s: f64,
    pub max_retries: u32,
    pub retry_backoff_ms: u64,
    pub max_inflight: usize,
}

impl Default for AgentEndpointConfig {
    fn default() -> Self {
        AgentEndpointConfig {
            url: "http://127.0.0.1:8000/solve".into(),
            timeout_s: 900.0,
            max_retries: 0,
            retry_backoff_ms: 1000,
            max_inflight: 2,
        }
    }
}

fn build_agent(timeout_s: f64) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs_f64(timeout_s.max(0.001))))
        .http_status_as_error(false)
        .build()
        .into()
}

fn map_transport(err: ureq::Error) -> BackendError {
    match err {
        ureq::Error::Timeout(_) => BackendError::Timeout,
        other => BackendError::Transport {
            message: other.to_string(),
        },
    }
}

/// Retries transient failures with exponential backoff
/// (`backoff`, `2 * backoff`, ...).
fn with_retries<T>(max_retries: u32, backoff: Duration, mut call: impl FnMut() -> Result<T, BackendError>) -> Result<T, BackendError> {
    let mut attempt = 0;
    loop {
        match call() {
            Err(e) if e.is_transient() && attempt < max_retries => {
                let wait = backoff * 2u32.saturating_pow(attempt);
                tracing::debug!(attempt, ?wait, "transient upstream failure: {e}");
                std::thread::sleep(wait);
                attempt += 1;
            }
            other => return other,
        }
    }
}

fn status_error(status: u16) -> BackendError {
    match status {
        401 | 403 => BackendError::AuthFailure,
        s => BackendError::Upstream { status: s },
    }
}

pub struct OpenAiChatClient {
    config: ChatBackendConfig,
    http: ureq::Agent,
    limiter: InflightLimiter,
}

impl OpenAiChatClient {
    pub fn new(config: ChatBackendConfig) -> Self {
        OpenAiChatClient {
            http: build_agent(config.timeout_s),
            limiter: InflightLimiter::new(config.max_inflight),
            config,
        }
    }

    pub fn config(&self) -> &ChatBackendConfig {
        &self.config
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn request_body(&self, prompt: &str) -> Value {
        let mut messages = Vec::with_capacity(2);
        if let Some(system) = &self.config.system_prompt {
            messages.push(json!({"role": "system", "content": system}));
        }
        messages.push(json!({"role": "user", "content": prompt}));
        json!({
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
        })
    }

    fn credential(&self) -> Result<Option<String>, BackendError> {
        match &self.config.api_key_env {
            None => Ok(None),
            Some(name) => std::env::var(name)
                .map(Some)
                .map_err(|_| BackendError::MissingCredential { env: name.clone() }),
        }
    }

    fn attempt(&self, body: &Value) -> Result<String, BackendError> {
        let mut request = self.http.post(&self.endpoint());
        if let Some(key) = self.credential()? {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let response = request.send_json(body).map_err(map_transport)?;
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(status_error(status));
        }
        let parsed: Value = response
            .into_body()
            .read_json()
            .map_err(|e| BackendError::InvalidResponse { message: e.to_string() })?;
        extract_content(&parsed)
    }
}

fn extract_content(response: &Value) -> Result<String, BackendError> {
    let message = response
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .ok_or_else(|| BackendError::InvalidResponse {
            message: "missing choices[0].message".into(),
        })?;
    match message.get("content") {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Null) | None => Ok(String::new()),
        Some(other) => Err(BackendError::InvalidResponse {
            message: format!("unexpected content type: {other}"),
        }),
    }
}

impl ChatBackend for OpenAiChatClient {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let body = self.request_body(prompt);
        let _permit = self.limiter.acquire();
        with_retries(self.config.max_retries, Duration::from_millis(self.config.retry_backoff_ms), || {
            self.attempt(&body)
        })
    }
}

pub struct HttpAgentClient {
    config: AgentEndpointConfig,
    http: ureq::Agent,
    limiter: InflightLimiter,
}

impl HttpAgentClient {
    pub fn new(config: AgentEndpointConfig) -> Self {
        HttpAgentClient {
            http: build_agent(config.timeout_s),
            limiter: InflightLimiter::new(config.max_inflight),
            config,
        }
    }

    fn attempt(&self, question: &str) -> Result<AgentReply, BackendError> {
        let response = self
            .http
            .post(&self.config.url)
            .send_json(json!({ "question": question }))
            .map_err(map_transport)?;
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(status_error(status));
        }
        response
            .into_body()
            .read_json::<AgentReply>()
            .map_err(|e| BackendError::InvalidResponse { message: e.to_string() })
    }
}

impl AgentBackend for HttpAgentClient {
    fn solve(&self, question: &str) -> Result<AgentReply, BackendError> {
        let _permit = self.limiter.acquire();
        with_retries(self.config.max_retries, Duration::from_millis(self.config.retry_backoff_ms), || {
            self.attempt(question)
        })
    }
}
