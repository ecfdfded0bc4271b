//! Layered configuration: built-in defaults < TOML files < `ROUTEGATE_*`
//! environment variables < command-line flags.
//!
//! Every key has a dotted path (`retrieval.alpha`). The environment name is
//! the path upper-cased with dots replaced by underscores and the
//! `ROUTEGATE_` prefix (`ROUTEGATE_RETRIEVAL_ALPHA`). The resolved config
//! remembers which layer set each key so validation errors can name it.
//!
//! Credentials never appear here: backends are configured with the *name* of
//! the environment variable that holds the key.

use std::collections::BTreeMap;
use std::fmt;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::memory::LoadOptions;
use crate::retrieval::RetrievalConfig;
use crate::route::Route;
use crate::routing::prompt::PromptTemplates;
use crate::routing::{RouterSettings, RoutingError, Strategy};
use crate::solvers::http::{AgentEndpointConfig, ChatBackendConfig};
use crate::solvers::ExecuteOptions;

pub const ENV_PREFIX: &str = "ROUTEGATE_";

/// Environment variables with the prefix that are not config keys.
const ENV_RESERVED: [&str; 2] = ["ROUTEGATE_CONFIG", "ROUTEGATE_LOG"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layer {
    Default,
    File(PathBuf),
    Env(String),
    Flag,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layer::Default => f.write_str("defaults"),
            Layer::File(p) => write!(f, "config file {}", p.display()),
            Layer::Env(name) => write!(f, "environment variable {name}"),
            Layer::Flag => f.write_str("command-line flag"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{key} (from {layer}): {reason}")]
    Invalid { key: String, layer: Layer, reason: String },
    #[error("unknown config key '{key}' (from {layer})")]
    UnknownKey { key: String, layer: Layer },
    #[error("cannot read config file {}: {reason}", path.display())]
    File { path: PathBuf, reason: String },
    #[error("flag override '{0}' is not of the form key=value")]
    MalformedOverride(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Int,
    Float,
    Bool,
    Str,
    Strategy,
    Route,
}

const KEYS: &[(&str, Kind)] = &[
    ("retrieval.k", Kind::Int),
    ("retrieval.alpha", Kind::Float),
    ("retrieval.bm25_k1", Kind::Float),
    ("retrieval.bm25_b", Kind::Float),
    ("retrieval.embed_dim", Kind::Int),
    ("retrieval.index_cache", Kind::Str),
    ("router.strategy", Kind::Strategy),
    ("router.model", Kind::Str),
    ("router.base_url", Kind::Str),
    ("router.api_key_env", Kind::Str),
    ("router.timeout_s", Kind::Float),
    ("router.fallback_route", Kind::Route),
    ("router.max_retries", Kind::Int),
    ("router.parse_retries", Kind::Int),
    ("router.example_truncate_chars", Kind::Int),
    ("router.temperature", Kind::Float),
    ("router.template_dir", Kind::Str),
    ("router.max_inflight", Kind::Int),
    ("llm.model", Kind::Str),
    ("llm.base_url", Kind::Str),
    ("llm.api_key_env", Kind::Str),
    ("llm.timeout_s", Kind::Float),
    ("llm.max_retries", Kind::Int),
    ("llm.temperature", Kind::Float),
    ("llm.max_inflight", Kind::Int),
    ("agent.url", Kind::Str),
    ("agent.timeout_s", Kind::Float),
    ("agent.max_retries", Kind::Int),
    ("agent.max_inflight", Kind::Int),
    ("solvers.escalate_on_failure", Kind::Bool),
    ("memory.path", Kind::Str),
    ("memory.strict", Kind::Bool),
    ("bench.path", Kind::Str),
    ("eval.report", Kind::Str),
    ("eval.verify_labels", Kind::Bool),
    ("service.listen", Kind::Str),
    ("service.request_timeout_s", Kind::Float),
    ("runtime.max_inflight", Kind::Int),
    ("runtime.parallel", Kind::Bool),
    ("strict", Kind::Bool),
];

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

/// Environment variable name for a config key.
pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('.', "_").to_ascii_uppercase())
}

/// Every recognized dotted key.
pub fn known_keys() -> impl Iterator<Item = &'static str> {
    KEYS.iter().map(|(k, _)| *k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalSection {
    pub k: usize,
    pub alpha: f64,
    pub bm25_k1: f64,
    pub bm25_b: f64,
    pub embed_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_cache: Option<PathBuf>,
}

impl Default for RetrievalSection {
    fn default() -> Self {
        let r = RetrievalConfig::default();
        RetrievalSection {
            k: r.k,
            alpha: r.alpha,
            bm25_k1: r.bm25_k1,
            bm25_b: r.bm25_b,
            embed_dim: r.embed_dim,
            index_cache: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RouterSection {
    pub strategy: Strategy,
    pub model: String,
    pub base_url: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    pub timeout_s: f64,
    pub fallback_route: Route,
    pub max_retries: u32,
    pub parse_retries: u32,
    pub example_truncate_chars: usize,
    pub temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub template_dir: Option<PathBuf>,
    pub max_inflight: usize,
}

impl Default for RouterSection {
    fn default() -> Self {
        let chat = ChatBackendConfig::default();
        let settings = RouterSettings::default();
        RouterSection {
            strategy: settings.strategy,
            model: chat.model,
            base_url: chat.base_url,
            api_key_env: chat.api_key_env,
            timeout_s: chat.timeout_s,
            fallback_route: settings.fallback_route,
            max_retries: chat.max_retries,
            parse_retries: settings.parse_retries,
            example_truncate_chars: settings.example_truncate_chars,
            temperature: chat.temperature,
            template_dir: None,
            max_inflight: chat.max_inflight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmSection {
    pub model: String,
    pub base_url: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    pub timeout_s: f64,
    pub max_retries: u32,
    pub temperature: f64,
    pub max_inflight: usize,
}

impl Default for LlmSection {
    fn default() -> Self {
        let chat = ChatBackendConfig::default();
        LlmSection {
            model: chat.model,
            base_url: chat.base_url,
            api_key_env: chat.api_key_env,
            timeout_s: chat.timeout_s,
            max_retries: chat.max_retries,
            temperature: chat.temperature,
            max_inflight: chat.max_inflight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentSection {
    pub url: String,
    pub timeout_s: f64,
    pub max_retries: u32,
    pub max_inflight: usize,
}

impl Default for AgentSection {
    fn default() -> Self {
        let a = AgentEndpointConfig::default();
        AgentSection {
            url: a.url,
            timeout_s: a.timeout_s,
            max_retries: a.max_retries,
            max_inflight: a.max_inflight,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolversSection {
    pub escalate_on_failure: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MemorySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub strict: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    pub verify_labels: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceSection {
    pub listen: String,
    pub request_timeout_s: f64,
}

impl Default for ServiceSection {
    fn default() -> Self {
        ServiceSection {
            listen: "127.0.0.1:8080".into(),
            request_timeout_s: 960.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuntimeSection {
    /// Global cap on concurrent upstream work in batch commands.
    pub max_inflight: usize,
    pub parallel: bool,
}

impl Default for RuntimeSection {
    fn default() -> Self {
        RuntimeSection {
            max_inflight: 8,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AppConfig {
    pub retrieval: RetrievalSection,
    pub router: RouterSection,
    pub llm: LlmSection,
    pub agent: AgentSection,
    pub solvers: SolversSection,
    pub memory: MemorySection,
    pub bench: BenchSection,
    pub eval: EvalSection,
    pub service: ServiceSection,
    pub runtime: RuntimeSection,
    pub strict: bool,
}

/// A resolved config plus the layer each key came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub config: AppConfig,
    origins: BTreeMap<String, Layer>,
}

impl ResolvedConfig {
    pub fn origin(&self, key: &str) -> &Layer {
        self.origins.get(key).unwrap_or(&Layer::Default)
    }
}

/// Raw inputs for [`load_config`].
#[derive(Debug, Clone, Default)]
pub struct ConfigSources {
    pub files: Vec<PathBuf>,
    pub env: Vec<(String, String)>,
    /// `(dotted key, value)` pairs, applied last.
    pub flags: Vec<(String, String)>,
}

impl ConfigSources {
    /// Captures the `ROUTEGATE_*` variables of the current process.
    pub fn with_process_env(mut self) -> Self {
        self.env = std::env::vars().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
        self
    }
}

/// Splits a `key=value` override.
pub fn parse_override(raw: &str) -> Result<(String, String), ConfigError> {
    let (k, v) = raw.split_once('=').ok_or_else(|| ConfigError::MalformedOverride(raw.to_string()))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(ConfigError::MalformedOverride(raw.to_string()));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

struct Entry {
    key: String,
    value: toml::Value,
    layer: Layer,
}

fn invalid(key: &str, layer: &Layer, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        layer: layer.clone(),
        reason: reason.into(),
    }
}

/// Converts a raw string (environment or flag) into a typed value.
fn parse_text(key: &str, kind: Kind, raw: &str, layer: &Layer) -> Result<toml::Value, ConfigError> {
    let raw = raw.trim();
    Ok(match kind {
        Kind::Int => {
            let n: i64 = raw
                .parse()
                .map_err(|_| invalid(key, layer, format!("expected a non-negative integer, got '{raw}'")))?;
            if n < 0 {
                return Err(invalid(key, layer, format!("expected a non-negative integer, got {n}")));
            }
            toml::Value::Integer(n)
        }
        Kind::Float => {
            let x: f64 = raw
                .parse()
                .map_err(|_| invalid(key, layer, format!("expected a number, got '{raw}'")))?;
            toml::Value::Float(x)
        }
        Kind::Bool => match raw.to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" | "on" => toml::Value::Boolean(true),
            "false" | "0" | "no" | "off" => toml::Value::Boolean(false),
            _ => return Err(invalid(key, layer, format!("expected true or false, got '{raw}'"))),
        },
        Kind::Str | Kind::Strategy | Kind::Route => check_typed(key, kind, toml::Value::String(raw.to_string()), layer)?,
    })
}

/// Checks (and lightly coerces) a value read from a TOML file.
fn check_typed(key: &str, kind: Kind, value: toml::Value, layer: &Layer) -> Result<toml::Value, ConfigError> {
    use toml::Value as V;
    match (kind, value) {
        (Kind::Int, V::Integer(n)) if n >= 0 => Ok(V::Integer(n)),
        (Kind::Int, v) => Err(invalid(key, layer, format!("expected a non-negative integer, got {v}"))),
        (Kind::Float, V::Float(x)) => Ok(V::Float(x)),
        (Kind::Float, V::Integer(n)) => Ok(V::Float(n as f64)),
        (Kind::Float, v) => Err(invalid(key, layer, format!("expected a number, got {v}"))),
        (Kind::Bool, V::Boolean(b)) => Ok(V::Boolean(b)),
        (Kind::Bool, v) => Err(invalid(key, layer, format!("expected true or false, got {v}"))),
        (Kind::Str, V::String(s)) => Ok(V::String(s)),
        (Kind::Strategy, V::String(s)) => s
            .parse::<Strategy>()
            .map(|st| V::String(st.as_str().to_string()))
            .map_err(|e| invalid(key, layer, e.to_string())),
        (Kind::Route, V::String(s)) => s
            .parse::<Route>()
            .map(|r| V::String(r.as_str().to_string()))
            .map_err(|e| invalid(key, layer, e.to_string())),
        (_, v) => Err(invalid(key, layer, format!("expected a string, got {v}"))),
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) if kind_of(&key).is_none() => flatten(&key, t, out),
            _ => out.push((key, v.clone())),
        }
    }
}

fn set_path(root: &mut toml::Table, key: &str, value: toml::Value) {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut table = root;
    for part in parts {
        let slot = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        if !slot.is_table() {
            *slot = toml::Value::Table(toml::Table::new());
        }
        table = slot.as_table_mut().expect("just ensured a table");
    }
    table.insert(last.to_string(), value);
}

fn read_file(path: &Path) -> Result<toml::Table, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    text.parse::<toml::Table>().map_err(|e| ConfigError::File {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Resolves and validates the configuration.
pub fn load_config(sources: &ConfigSources) -> Result<ResolvedConfig, ConfigError> {
    let mut entries: Vec<Entry> = Vec::new();
    let mut unknown: Vec<(String, Layer)> = Vec::new();

    for path in &sources.files {
        let layer = Layer::File(path.clone());
        let mut flat = Vec::new();
        flatten("", &read_file(path)?, &mut flat);
        for (key, value) in flat {
            match kind_of(&key) {
                Some(kind) => entries.push(Entry {
                    value: check_typed(&key, kind, value, &layer)?,
                    key,
                    layer: layer.clone(),
                }),
                None => unknown.push((key, layer.clone())),
            }
        }
    }

    let mut env: Vec<&(String, String)> = sources.env.iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    env.sort();
    for (name, raw) in env {
        if ENV_RESERVED.contains(&name.as_str()) {
            continue;
        }
        let layer = Layer::Env(name.clone());
        match KEYS.iter().find(|(k, _)| env_name(k) == *name) {
            Some((key, kind)) => entries.push(Entry {
                key: key.to_string(),
                value: parse_text(key, *kind, raw, &layer)?,
                layer,
            }),
            None => unknown.push((name.clone(), layer)),
        }
    }

    for (key, raw) in &sources.flags {
        match kind_of(key) {
            Some(kind) => entries.push(Entry {
                key: key.clone(),
                value: parse_text(key, kind, raw, &Layer::Flag)?,
                layer: Layer::Flag,
            }),
            None => unknown.push((key.clone(), Layer::Flag)),
        }
    }

    let strict = entries
        .iter()
        .rev()
        .find(|e| e.key == "strict")
        .and_then(|e| e.value.as_bool())
        .unwrap_or(false);
    if let Some((key, layer)) = unknown.first() {
        if strict {
            return Err(ConfigError::UnknownKey {
                key: key.clone(),
                layer: layer.clone(),
            });
        }
        for (key, layer) in &unknown {
            tracing::warn!("ignoring unknown config key '{key}' from {layer}");
        }
    }

    let mut root = toml::Table::new();
    let mut origins = BTreeMap::new();
    for entry in entries {
        set_path(&mut root, &entry.key, entry.value);
        origins.insert(entry.key, entry.layer);
    }
    let config: AppConfig = toml::Value::Table(root)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Invalid {
            key: "<config>".into(),
            layer: Layer::Default,
            reason: e.to_string(),
        })?;
    let resolved = ResolvedConfig { config, origins };
    resolved.validate()?;
    Ok(resolved)
}

fn is_env_var_name(s: &str) -> bool {
    !s.is_empty()
        && !s.starts_with(|c: char| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

impl ResolvedConfig {
    /// Resolves defaults only.
    pub fn defaults() -> Self {
        ResolvedConfig {
            config: AppConfig::default(),
            origins: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.config;
        let fail = |key: &str, reason: &str| Err(invalid(key, self.origin(key), reason));

        if let Err(crate::retrieval::RetrievalError::InvalidConfig { key, reason }) = c.retrieval_config().validate() {
            return fail(key, &reason);
        }
        let positive = [
            ("router.timeout_s", c.router.timeout_s),
            ("llm.timeout_s", c.llm.timeout_s),
            ("agent.timeout_s", c.agent.timeout_s),
            ("service.request_timeout_s", c.service.request_timeout_s),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return fail(key, "must be a positive number of seconds");
            }
        }
        let caps = [
            ("router.max_inflight", c.router.max_inflight),
            ("llm.max_inflight", c.llm.max_inflight),
            ("agent.max_inflight", c.agent.max_inflight),
            ("runtime.max_inflight", c.runtime.max_inflight),
            ("router.example_truncate_chars", c.router.example_truncate_chars),
        ];
        for (key, v) in caps {
            if v == 0 {
                return fail(key, "must be >= 1");
            }
        }
        for (key, t) in [("router.temperature", c.router.temperature), ("llm.temperature", c.llm.temperature)] {
            if !(0.0..=2.0).contains(&t) {
                return fail(key, "must lie in [0, 2]");
            }
        }
        for (key, url) in [
            ("router.base_url", &c.router.base_url),
            ("llm.base_url", &c.llm.base_url),
            ("agent.url", &c.agent.url),
        ] {
            if !(url.starts_with("http://") || url.starts_with("https://")) {
                return fail(key, "must be an http:// or https:// URL");
            }
        }
        for (key, name) in [
            ("router.api_key_env", &c.router.api_key_env),
            ("llm.api_key_env", &c.llm.api_key_env),
        ] {
            if let Some(name) = name {
                if !is_env_var_name(name) {
                    return fail(key, "must be an environment variable name (A-Z, 0-9, _), not a credential");
                }
            }
        }
        if c.service.listen.parse::<SocketAddr>().is_err() {
            return fail("service.listen", "must be an address such as 127.0.0.1:8080");
        }
        Ok(())
    }
}

impl AppConfig {
    pub fn retrieval_config(&self) -> RetrievalConfig {
        RetrievalConfig {
            k: self.retrieval.k,
            alpha: self.retrieval.alpha,
            bm25_k1: self.retrieval.bm25_k1,
            bm25_b: self.retrieval.bm25_b,
            embed_dim: self.retrieval.embed_dim,
        }
    }

    pub fn router_chat_config(&self) -> ChatBackendConfig {
        let r = &self.router;
        ChatBackendConfig {
            base_url: r.base_url.clone(),
            model: r.model.clone(),
            api_key_env: r.api_key_env.clone(),
            timeout_s: r.timeout_s,
            max_retries: r.max_retries,
            temperature: r.temperature,
            max_inflight: r.max_inflight,
            ..ChatBackendConfig::default()
        }
    }

    pub fn llm_chat_config(&self) -> ChatBackendConfig {
        let l = &self.llm;
        ChatBackendConfig {
            base_url: l.base_url.clone(),
            model: l.model.clone(),
            api_key_env: l.api_key_env.clone(),
            timeout_s: l.timeout_s,
            max_retries: l.max_retries,
            temperature: l.temperature,
            max_inflight: l.max_inflight,
            ..ChatBackendConfig::default()
        }
    }

    pub fn agent_config(&self) -> AgentEndpointConfig {
        AgentEndpointConfig {
            url: self.agent.url.clone(),
            timeout_s: self.agent.timeout_s,
            max_retries: self.agent.max_retries,
            max_inflight: self.agent.max_inflight,
            ..AgentEndpointConfig::default()
        }
    }

    /// Router settings, with templates read from `router.template_dir` when set.
    pub fn router_settings(&self) -> Result<RouterSettings, RoutingError> {
        let templates = match &self.router.template_dir {
            Some(dir) => PromptTemplates::load_dir(dir)?,
            None => PromptTemplates::builtin(),
        };
        Ok(RouterSettings {
            strategy: self.router.strategy,
            k: self.retrieval.k,
            fallback_route: self.router.fallback_route,
            parse_retries: self.router.parse_retries,
            example_truncate_chars: self.router.example_truncate_chars,
            templates,
        })
    }

    pub fn execute_options(&self) -> ExecuteOptions {
        ExecuteOptions {
            escalate_on_failure: self.solvers.escalate_on_failure,
        }
    }

    pub fn memory_load_options(&self) -> LoadOptions {
        LoadOptions {
            strict: self.memory.strict || self.strict,
        }
    }

    pub fn execution(&self) -> Execution {
        if self.runtime.parallel {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }

    /// JSON snapshot embedded into reports.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
