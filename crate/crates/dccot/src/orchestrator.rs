//! The director/worker inference loop.
//!
//! One episode alternates between single-thread director inference and
//! concurrent worker fan-out. The director generates until it emits the
//! spawn-open tag; each of the K workers then continues from the director's
//! context plus its own open tag, all K in parallel, each stopped by its own
//! close tag. The worker outputs are stitched back into the director's
//! context in index order, the budget is charged for the longest worker, and
//! the director resumes. The loop ends at end-of-sequence or when the
//! longest-path budget runs out, so the transcript's longest path length can
//! never exceed the budget.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{BackendError, GenerationBackend, InferResult, StopReason};
use crate::tags::TagConfig;
use crate::transcript::{Part, Role, Segment, SpawnRound, Terminated, Transcript};

/// How per-call token limits are derived from the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerCallLimitPolicy {
    /// Every call receives the full remaining budget as its limit.
    #[default]
    RemainingBudget,
}

/// Episode parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrchestratorConfig {
    /// Workers spawned per round.
    pub num_workers: usize,
    /// Longest-path token budget for the whole episode.
    pub budget: usize,
    pub tags: TagConfig,
    /// Optional cap on spawn rounds; hitting it ends the episode as if the
    /// budget were exhausted. Unlimited when absent.
    pub max_rounds: Option<usize>,
    pub per_call_limit_policy: PerCallLimitPolicy,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        Self {
            num_workers: 3,
            budget: 12_000,
            tags: TagConfig::default(),
            max_rounds: None,
            per_call_limit_policy: PerCallLimitPolicy::RemainingBudget,
        }
    }
}

impl OrchestratorConfig {
    pub fn validate(&self) -> Result<(), OrchestratorError> {
        if self.num_workers == 0 {
            return Err(OrchestratorError::InvalidConfig(
                "num_workers must be at least 1".to_string(),
            ));
        }
        if self.budget == 0 {
            return Err(OrchestratorError::InvalidConfig(
                "budget must be at least 1".to_string(),
            ));
        }
        self.tags
            .validate()
            .map_err(|e| OrchestratorError::InvalidConfig(e.to_string()))?;
        Ok(())
    }
}

/// Episode failures. Budget exhaustion is not an error; it terminates the
/// episode with [`Terminated::BudgetExhausted`].
#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("{context}: {source}")]
    Backend {
        context: String,
        #[source]
        source: BackendError,
    },
    #[error("invalid orchestrator config: {0}")]
    InvalidConfig(String),
}

/// One inference call as observed from outside.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEntry {
    pub role: Role,
    /// Director entries: rounds completed before the call. Worker entries:
    /// the 1-based round being generated.
    pub round: usize,
    pub worker_index: Option<usize>,
    /// The exact prompt supplied to the backend.
    pub prompt: String,
    pub prompt_len: usize,
    /// Token limit given to the call (the remaining budget).
    pub limit: usize,
    pub text: String,
    pub token_count: usize,
    pub stop_reason: StopReason,
}

/// Ordered log of every inference call in an episode.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub calls: Vec<TraceEntry>,
}

impl EpisodeTrace {
    /// Entries for the director path, in order.
    pub fn director_calls(&self) -> impl Iterator<Item = &TraceEntry> {
        self.calls.iter().filter(|c| c.role == Role::Director)
    }

    /// Entries for round `round` (1-based), in worker-index order.
    pub fn worker_calls(&self, round: usize) -> impl Iterator<Item = &TraceEntry> {
        self.calls
            .iter()
            .filter(move |c| c.role == Role::Worker && c.round == round)
    }
}

/// The single-thread inference primitive: generation stops at the first of
/// the token limit, the finish string, or end-of-sequence. Backend failures
/// are propagated with the call context attached.
pub fn infer(
    backend: &dyn GenerationBackend,
    prompt: &str,
    finish: &str,
    limit: usize,
) -> Result<InferResult, OrchestratorError> {
    debug_assert!(limit >= 1, "infer requires limit >= 1");
    debug_assert!(!finish.is_empty(), "infer requires a finish string");
    backend
        .generate(prompt, std::slice::from_ref(&finish.to_string()), limit)
        .map_err(|source| OrchestratorError::Backend {
            context: format!(
                "inference with finish `{finish}`, limit {limit}, prompt of {} bytes",
                prompt.len()
            ),
            source,
        })
}

/// Runs one full episode against the backend.
///
/// The worker calls of a round are issued concurrently and the director
/// resumes only after all of them return. A worker that stops on its budget
/// (or emits end-of-sequence early) is stitched back with its close tag like
/// any other; only the director's budget decides when the episode ends.
pub fn run_episode(
    backend: &dyn GenerationBackend,
    prompt: &str,
    cfg: &OrchestratorConfig,
) -> Result<(Transcript, EpisodeTrace), OrchestratorError> {
    cfg.validate()?;
    let tags = &cfg.tags;
    let mut remaining = cfg.budget;
    let mut context = prompt.to_string();
    let mut parts: Vec<Part> = Vec::new();
    let mut trace = EpisodeTrace::default();
    let mut rounds_done = 0usize;

    let terminated = loop {
        // Director turn: generate until the spawn tag, EOS, or the budget.
        let result = infer(backend, &context, &tags.spawn_open, remaining)?;
        trace.calls.push(TraceEntry {
            role: Role::Director,
            round: rounds_done,
            worker_index: None,
            prompt: context.clone(),
            prompt_len: context.len(),
            limit: remaining,
            text: result.text.clone(),
            token_count: result.token_count,
            stop_reason: result.stop_reason,
        });
        context.push_str(&result.text);
        remaining = remaining.saturating_sub(result.token_count);
        parts.push(Part::Director(Segment {
            role: Role::Director,
            round_index: rounds_done,
            worker_index: None,
            text: result.text.clone(),
            length: result.token_count,
        }));

        match result.stop_reason {
            StopReason::Eos => break Terminated::Eos,
            StopReason::Budget => break Terminated::BudgetExhausted,
            StopReason::FinishString => {}
        }

        // The director wants to spawn. Honor the round cap and make sure the
        // workers would receive a positive limit.
        if cfg.max_rounds.is_some_and(|cap| rounds_done >= cap) {
            break Terminated::BudgetExhausted;
        }
        if remaining == 0 {
            break Terminated::BudgetExhausted;
        }

        context.push_str(&tags.spawn_open);
        let round_number = rounds_done + 1;
        let worker_limit = remaining;

        // Fan out: all K workers run concurrently, each seeing the director's
        // context (spawn tag included) plus its own open tag, never a sibling.
        let results: Vec<Result<InferResult, OrchestratorError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (1..=cfg.num_workers)
                .map(|i| {
                    let worker_prompt = format!("{context}{}", tags.worker_open(i));
                    let close = tags.worker_close(i);
                    scope.spawn(move || infer(backend, &worker_prompt, &close, worker_limit))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker thread")).collect()
        });

        let mut workers = Vec::with_capacity(cfg.num_workers);
        for (offset, result) in results.into_iter().enumerate() {
            let index = offset + 1;
            let result = result?;
            trace.calls.push(TraceEntry {
                role: Role::Worker,
                round: round_number,
                worker_index: Some(index),
                prompt: format!("{context}{}", tags.worker_open(index)),
                prompt_len: context.len() + tags.worker_open(index).len(),
                limit: worker_limit,
                text: result.text.clone(),
                token_count: result.token_count,
                stop_reason: result.stop_reason,
            });
            workers.push(Segment {
                role: Role::Worker,
                round_index: round_number,
                worker_index: Some(index),
                text: result.text,
                length: result.token_count,
            });
        }

        // Reassemble in index order, charge the budget for the longest
        // worker, and hand the context back to the director.
        let round_cost = workers.iter().map(|w| w.length).max().unwrap_or(0);
        for w in &workers {
            context.push_str(&tags.worker_open(w.worker_index.expect("worker index")));
            context.push_str(&w.text);
            context.push_str(&tags.worker_close(w.worker_index.expect("worker index")));
        }
        context.push_str(&tags.spawn_close);
        parts.push(Part::Round(SpawnRound { workers }));
        rounds_done = round_number;
        remaining = remaining.saturating_sub(round_cost);

        if remaining == 0 {
            // The round consumed the rest of the budget; the director cannot
            // resume, so the transcript closes with an empty segment.
            parts.push(Part::Director(Segment {
                role: Role::Director,
                round_index: rounds_done,
                worker_index: None,
                text: String::new(),
                length: 0,
            }));
            break Terminated::BudgetExhausted;
        }
    };

    let transcript = Transcript {
        prompt: prompt.to_string(),
        parts,
        terminated,
    };
    debug_assert!(transcript.check_shape().is_ok());
    debug_assert!(transcript.longest_path_length() <= cfg.budget);
    Ok((transcript, trace))
}
