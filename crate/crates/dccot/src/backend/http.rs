//! Completions-protocol client for any OpenAI-compatible serving engine.
//!
//! One POST to `{base_url}/v1/completions` per generate call, with
//! `{model, prompt, max_tokens, stop, temperature, top_p}` in the body. The
//! server's `finish_reason` maps onto [`StopReason`]: `"length"` is a budget
//! stop, `"stop"` is a stop string when the server names one (or the client
//! finds one by rescanning the text), and otherwise end-of-sequence.
//! Transient transport errors are retried with exponential backoff.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{BackendError, GenerationBackend, InferResult, StopReason};
use crate::counter::CounterHandle;

/// Environment variable overriding the configured base URL.
pub const ENV_BASE_URL: &str = "DCCOT_BASE_URL";
/// Environment variable supplying the bearer token.
pub const ENV_API_TOKEN: &str = "DCCOT_API_TOKEN";

/// Connection settings for the completions endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpBackendConfig {
    pub base_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub top_p: f64,
    pub request_timeout_secs: u64,
    pub max_retries: u32,
    pub auth_token: Option<String>,
    /// Upper bound on in-flight requests from this backend instance.
    pub max_connections: usize,
}

impl Default for HttpBackendConfig {
    fn default() -> Self {
        Self {
            base_url: "http://localhost:8000".to_string(),
            model_name: "default".to_string(),
            temperature: 0.6,
            top_p: 0.95,
            request_timeout_secs: 600,
            max_retries: 3,
            auth_token: None,
            max_connections: 16,
        }
    }
}

impl HttpBackendConfig {
    /// Applies `DCCOT_BASE_URL` / `DCCOT_API_TOKEN` on top of the config.
    pub fn with_env_overrides(mut self) -> Self {
        if let Ok(url) = std::env::var(ENV_BASE_URL) {
            if !url.is_empty() {
                self.base_url = url;
            }
        }
        if let Ok(token) = std::env::var(ENV_API_TOKEN) {
            if !token.is_empty() {
                self.auth_token = Some(token);
            }
        }
        self
    }

    /// Sanity limits on the sampling parameters.
    pub fn validate(&self) -> Result<(), String> {
        if self.temperature <= 0.0 {
            return Err(format!("temperature must be > 0, got {}", self.temperature));
        }
        if self.top_p <= 0.0 || self.top_p > 1.0 {
            return Err(format!("top_p must be in (0, 1], got {}", self.top_p));
        }
        if self.max_connections == 0 {
            return Err("max_connections must be at least 1".to_string());
        }
        Ok(())
    }
}

/// Counting semaphore bounding in-flight requests.
struct Gate {
    slots: Mutex<usize>,
    freed: Condvar,
}

impl Gate {
    fn new(slots: usize) -> Self {
        Self {
            slots: Mutex::new(slots),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut slots = self.slots.lock().expect("gate poisoned");
        while *slots == 0 {
            slots = self.freed.wait(slots).expect("gate poisoned");
        }
        *slots -= 1;
        GateGuard { gate: self }
    }
}

struct GateGuard<'a> {
    gate: &'a Gate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        let mut slots = self.gate.slots.lock().expect("gate poisoned");
        *slots += 1;
        self.gate.freed.notify_one();
    }
}

/// Client for a completions-style server. Safe for concurrent calls.
pub struct HttpBackend {
    config: HttpBackendConfig,
    client: reqwest::blocking::Client,
    counter: CounterHandle,
    gate: Gate,
}

#[derive(Debug, Deserialize)]
struct CompletionsResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    #[serde(default)]
    text: String,
    #[serde(default)]
    finish_reason: Option<String>,
    /// vLLM extension: the stop string (or token id) that fired, null for EOS.
    #[serde(default)]
    stop_reason: Option<serde_json::Value>,
}

#[derive(Debug, Deserialize)]
struct Usage {
    #[serde(default)]
    completion_tokens: Option<usize>,
}

/// Transport failures are retried; protocol failures abort immediately.
enum PostError {
    Transport(String),
    Protocol(String),
}

impl HttpBackend {
    pub fn new(config: HttpBackendConfig, counter: CounterHandle) -> Result<Self, BackendError> {
        config.validate().map_err(BackendError::Protocol)?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.request_timeout_secs))
            .build()
            .map_err(|e| BackendError::Protocol(format!("client construction failed: {e}")))?;
        let gate = Gate::new(config.max_connections);
        Ok(Self {
            config,
            client,
            counter,
            gate,
        })
    }

    fn post_once(&self, body: &serde_json::Value) -> Result<CompletionsResponse, PostError> {
        let url = format!(
            "{}/v1/completions",
            self.config.base_url.trim_end_matches('/')
        );
        let mut req = self.client.post(&url).json(body);
        if let Some(token) = &self.config.auth_token {
            req = req.bearer_auth(token);
        }
        let resp = req
            .send()
            .map_err(|e| PostError::Transport(format!("transport: {e}")))?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| PostError::Transport(format!("body read: {e}")))?;
        if status.is_server_error() {
            return Err(PostError::Transport(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(PostError::Protocol(format!(
                "HTTP {status}: {}",
                text.chars().take(200).collect::<String>()
            )));
        }
        serde_json::from_str(&text)
            .map_err(|e| PostError::Protocol(format!("malformed response: {e}")))
    }

    /// Maps the server's reply onto the generate contract, rescanning for
    /// stop strings when the server does not name the one that fired.
    fn interpret(
        &self,
        resp: CompletionsResponse,
        stops: &[String],
        limit: usize,
    ) -> Result<InferResult, BackendError> {
        let usage_tokens = resp.usage.and_then(|u| u.completion_tokens);
        let choice = resp
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| BackendError::Protocol("response has no choices".to_string()))?;
        let mut text = choice.text;

        let finish = choice.finish_reason.as_deref().unwrap_or("stop");
        let stop_reason = match finish {
            "length" => StopReason::Budget,
            "stop" => match &choice.stop_reason {
                Some(serde_json::Value::String(fired)) => {
                    // Some servers include the stop string in the text.
                    if let Some(stripped) = text.strip_suffix(fired.as_str()) {
                        text = stripped.to_string();
                    }
                    StopReason::FinishString
                }
                Some(serde_json::Value::Null) | None => {
                    // No report: rescan locally, else it was end-of-sequence.
                    let found = stops
                        .iter()
                        .filter_map(|s| text.find(s.as_str()).map(|at| (at, s.len())))
                        .min();
                    match found {
                        Some((at, _)) => {
                            text.truncate(at);
                            StopReason::FinishString
                        }
                        None => StopReason::Eos,
                    }
                }
                Some(_) => StopReason::Eos,
            },
            other => {
                return Err(BackendError::Protocol(format!(
                    "unknown finish_reason `{other}`"
                )))
            }
        };

        let token_count = usage_tokens
            .unwrap_or_else(|| self.counter.count(&text))
            .min(limit);
        Ok(InferResult {
            text,
            token_count,
            stop_reason,
        })
    }
}

impl GenerationBackend for HttpBackend {
    fn generate(
        &self,
        prompt: &str,
        stops: &[String],
        limit: usize,
    ) -> Result<InferResult, BackendError> {
        let _slot = self.gate.acquire();
        let body = json!({
            "model": self.config.model_name,
            "prompt": prompt,
            "max_tokens": limit,
            "stop": stops,
            "temperature": self.config.temperature,
            "top_p": self.config.top_p,
        });

        let attempts = self.config.max_retries.max(1);
        let mut last_err = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(100 << (attempt - 1).min(6)));
            }
            match self.post_once(&body) {
                Ok(resp) => return self.interpret(resp, stops, limit),
                Err(PostError::Protocol(message)) => return Err(BackendError::Protocol(message)),
                Err(PostError::Transport(message)) => last_err = message,
            }
        }
        Err(BackendError::Unavailable {
            attempts,
            message: last_err,
        })
    }
}
