//! The single-call generation contract and its implementations.
//!
//! Everything above this layer is expressed in terms of one primitive:
//! generate a continuation for a prompt, stopping at the first of a stop
//! string, an end-of-sequence, or a token limit. The scripted backend replays
//! canned continuations for tests; the HTTP backend speaks the de-facto
//! completions JSON protocol to any serving engine.

mod http;
mod scripted;

pub use http::{HttpBackend, HttpBackendConfig};
pub use scripted::{PromptMatch, ScriptRule, ScriptedBackend};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Why a generate call stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// A stop string was emitted; it is excluded from the returned text.
    FinishString,
    /// The end-of-sequence token was emitted.
    Eos,
    /// The token limit was reached.
    Budget,
}

/// The output of one generate call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferResult {
    /// Generated text, excluding any stop string or end-of-sequence marker.
    pub text: String,
    /// Token count of `text`. Never exceeds the limit passed to the call.
    pub token_count: usize,
    pub stop_reason: StopReason,
}

/// Backend failures.
#[derive(Debug, Error)]
pub enum BackendError {
    /// No scripted rule matches the prompt.
    #[error("no script rule matches prompt starting `{prompt_head}`")]
    NoScriptRule { prompt_head: String },
    /// The server could not be reached (after retries).
    #[error("backend unavailable after {attempts} attempt(s): {message}")]
    Unavailable { attempts: u32, message: String },
    /// The server answered with something the client cannot interpret.
    #[error("protocol error: {0}")]
    Protocol(String),
}

/// A generation backend. Implementations must support concurrent calls, honor
/// the token limit exactly, stop at the earliest-matching stop string, and
/// exclude the stop string from the returned text.
pub trait GenerationBackend: Send + Sync {
    fn generate(
        &self,
        prompt: &str,
        stops: &[String],
        limit: usize,
    ) -> Result<InferResult, BackendError>;
}
