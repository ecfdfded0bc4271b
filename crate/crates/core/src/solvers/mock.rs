//! Deterministic in-process backends for tests, benches and offline runs.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use super::{AgentBackend, AgentReply, BackendError, ChatBackend};

type ChatFn = dyn Fn(&str) -> Result<String, BackendError> + Send + Sync;
type AgentFn = dyn Fn(&str) -> Result<AgentReply, BackendError> + Send + Sync;

pub struct MockChat {
    respond: Box<ChatFn>,
    delay: Duration,
    calls: AtomicUsize,
    prompts: Mutex<Vec<String>>,
}

impl MockChat {
    pub fn from_fn(f: impl Fn(&str) -> Result<String, BackendError> + Send + Sync + 'static) -> Self {
        MockChat {
            respond: Box::new(f),
            delay: Duration::ZERO,
            calls: AtomicUsize::new(0),
            prompts: Mutex::new(Vec::new()),
        }
    }

    pub fn fixed(text: impl Into<String>) -> Self {
        let text = text.into();
        Self::from_fn(move |_| Ok(text.clone()))
    }

    pub fn failing(error: BackendError) -> Self {
        Self::from_fn(move |_| Err(error.clone()))
    }

    /// Completion equals the last line of the prompt.
    pub fn echo_last_line() -> Self {
        Self::from_fn(|p| Ok(p.lines().last().unwrap_or_default().to_string()))
    }

    /// Returns the scripted completions in order; the last one repeats.
    pub fn sequence(script: Vec<Result<String, BackendError>>) -> Self {
        assert!(!script.is_empty(), "empty script");
        let next = AtomicUsize::new(0);
        Self::from_fn(move |_| {
            let i = next.fetch_add(1, Ordering::SeqCst).min(script.len() - 1);
            script[i].clone()
        })
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Prompts received so far, in call order.
    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }
}

impl ChatBackend for MockChat {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.prompts.lock().unwrap_or_else(|p| p.into_inner()).push(prompt.to_string());
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        (self.respond)(prompt)
    }
}

pub struct MockAgent {
    respond: Box<AgentFn>,
    delay: Duration,
    calls: AtomicUsize,
}

impl MockAgent {
    pub fn from_fn(f: impl Fn(&str) -> Result<AgentReply, BackendError> + Send + Sync + 'static) -> Self {
        MockAgent {
            respond: Box::new(f),
            delay: Duration::ZERO,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn fixed(answer: impl Into<String>) -> Self {
        let answer = answer.into();
        Self::from_fn(move |_| {
            Ok(AgentReply {
                answer: answer.clone(),
                steps: Some(3),
            })
        })
    }

    pub fn failing(error: BackendError) -> Self {
        Self::from_fn(move |_| Err(error.clone()))
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl AgentBackend for MockAgent {
    fn solve(&self, question: &str) -> Result<AgentReply, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        (self.respond)(question)
    }
}
