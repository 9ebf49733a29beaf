//! Deterministic scripted backend for tests and offline runs.
//!
//! A script is an ordered list of rules mapping a prompt predicate to a
//! continuation. The first matching rule wins; a prompt matching no rule is an
//! error, so test scripts stay exhaustive. The continuation is then truncated
//! exactly as a real engine would: at the earliest stop-string occurrence, at
//! the end-of-sequence marker, or at the token limit, whichever comes first.

use serde::{Deserialize, Serialize};

use super::{BackendError, GenerationBackend, InferResult, StopReason};
use crate::counter::CounterHandle;
use crate::tags::TagConfig;

/// How a rule matches the incoming prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum PromptMatch {
    Exact(String),
    Prefix(String),
    Contains(String),
}

impl PromptMatch {
    fn matches(&self, prompt: &str) -> bool {
        match self {
            PromptMatch::Exact(s) => prompt == s,
            PromptMatch::Prefix(s) => prompt.starts_with(s),
            PromptMatch::Contains(s) => prompt.contains(s),
        }
    }
}

/// One scripted continuation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptRule {
    #[serde(rename = "match")]
    pub matcher: PromptMatch,
    /// Text the model would go on to produce. May contain stop strings or the
    /// end-of-sequence marker; truncation happens at generate time.
    pub continuation: String,
    /// The model emits end-of-sequence after the continuation runs out.
    #[serde(default)]
    pub emits_eos: bool,
}

/// Replays scripted continuations. Safe for concurrent calls.
pub struct ScriptedBackend {
    rules: Vec<ScriptRule>,
    eos_marker: String,
    counter: CounterHandle,
}

impl ScriptedBackend {
    pub fn new(rules: Vec<ScriptRule>, tags: &TagConfig, counter: CounterHandle) -> Self {
        Self {
            rules,
            eos_marker: tags.eos_marker.clone(),
            counter,
        }
    }
}

impl GenerationBackend for ScriptedBackend {
    fn generate(
        &self,
        prompt: &str,
        stops: &[String],
        limit: usize,
    ) -> Result<InferResult, BackendError> {
        let rule = self
            .rules
            .iter()
            .find(|r| r.matcher.matches(prompt))
            .ok_or_else(|| BackendError::NoScriptRule {
                prompt_head: prompt.chars().take(80).collect(),
            })?;

        let continuation = rule.continuation.as_str();

        // Earliest stop-string occurrence, position first, then listing order.
        let stop_at = stops
            .iter()
            .filter_map(|s| continuation.find(s.as_str()))
            .min();
        let eos_at = continuation.find(&self.eos_marker);
        let budget_at = self.counter.prefix_bytes(continuation, limit);

        // The limit wins ties with a stop string at the same offset: once the
        // limit-th token is out, nothing further would be generated.
        let candidates = [
            (stop_at, StopReason::FinishString),
            (eos_at, StopReason::Eos),
        ];
        let earliest = candidates
            .iter()
            .filter_map(|(at, reason)| at.map(|a| (a, *reason)))
            .min_by_key(|(a, _)| *a);

        let (cut, reason) = match earliest {
            Some((at, reason)) if at < budget_at => (at, reason),
            _ => {
                if budget_at < continuation.len() {
                    (budget_at, StopReason::Budget)
                } else if rule.emits_eos {
                    (continuation.len(), StopReason::Eos)
                } else if self.counter.count(continuation) >= limit {
                    (budget_at, StopReason::Budget)
                } else {
                    // The script ran dry below the limit with no terminator;
                    // treat the continuation end as end-of-sequence.
                    (continuation.len(), StopReason::Eos)
                }
            }
        };

        let text = continuation[..cut].to_string();
        let token_count = self.counter.count(&text);
        Ok(InferResult {
            text,
            token_count,
            stop_reason: reason,
        })
    }
}
