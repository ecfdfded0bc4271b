//! Turning a resolved [`AppConfig`] into loaded components.

use std::sync::Arc;

use crate::config::AppConfig;
use crate::memory::{Memory, MemoryError};
use crate::retrieval::{build_index, Index, RetrievalError};
use crate::routing::{Router, RoutingError, Strategy};
use crate::solvers::{ChatBackend, HttpAgentClient, OpenAiChatClient};

#[derive(Debug, thiserror::Error)]
pub enum SetupError {
    #[error("strategy {0} needs a memory; set memory.path or --memory")]
    MemoryRequired(Strategy),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
}

/// Memory and index, when a memory path is configured.
#[derive(Clone, Default)]
pub struct Components {
    pub memory: Option<Arc<Memory>>,
    pub index: Option<Arc<Index>>,
}

/// Loads the memory and builds (or reads from cache) its index.
///
/// A configured cache file that does not exist yet is written after the
/// build; one that exists but does not match the memory is an error.
pub fn load_components(config: &AppConfig) -> Result<Components, SetupError> {
    let Some(path) = &config.memory.path else {
        return Ok(Components::default());
    };
    let memory = Memory::load_with(path, config.memory_load_options())?;
    let retrieval = config.retrieval_config();
    retrieval.validate()?;
    let index = match &config.retrieval.index_cache {
        Some(cache) if cache.exists() => {
            let index = Index::load_cache(cache, &memory)?;
            if index.config() != &retrieval {
                return Err(RetrievalError::StaleCache("cached retrieval settings differ from the configuration".into()).into());
            }
            tracing::info!(path = %cache.display(), "loaded index cache");
            index
        }
        Some(cache) => {
            let index = build_index(&memory, &retrieval)?;
            index.save_cache(cache)?;
            tracing::info!(path = %cache.display(), "wrote index cache");
            index
        }
        None => build_index(&memory, &retrieval)?,
    };
    tracing::info!(records = memory.len(), "memory loaded");
    Ok(Components {
        memory: Some(Arc::new(memory)),
        index: Some(Arc::new(index)),
    })
}

/// Fails early when the default strategy needs a memory that is not loaded.
pub fn require_memory_for(config: &AppConfig, components: &Components) -> Result<(), SetupError> {
    let strategy = config.router.strategy;
    if strategy.uses_retrieval() && components.index.is_none() {
        return Err(SetupError::MemoryRequired(strategy));
    }
    Ok(())
}

pub fn build_router(config: &AppConfig, components: &Components, backend: Arc<dyn ChatBackend>) -> Result<Router, SetupError> {
    Ok(Router::new(
        components.memory.clone(),
        components.index.clone(),
        backend,
        config.router_settings()?,
    ))
}

pub fn router_backend(config: &AppConfig) -> Arc<dyn ChatBackend> {
    Arc::new(OpenAiChatClient::new(config.router_chat_config()))
}

pub fn llm_backend(config: &AppConfig) -> Arc<dyn ChatBackend> {
    Arc::new(OpenAiChatClient::new(config.llm_chat_config()))
}

pub fn agent_backend(config: &AppConfig) -> Arc<HttpAgentClient> {
    Arc::new(HttpAgentClient::new(config.agent_config()))
}
