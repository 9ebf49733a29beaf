//! Deterministic episode planning for scripted runs.
//!
//! A plan fixes every director segment and worker text ahead of time; from it
//! we derive an exact-match script (one rule per inference call, keyed on the
//! full prompt that call will see) and the transcript the episode must
//! produce. Test suites compare orchestrator output against both.

use crate::backend::ScriptRule;
use crate::backend::{PromptMatch, ScriptedBackend};
use crate::counter::{CounterHandle, TokenCounter};
use crate::tags::TagConfig;
use crate::transcript::{Part, Segment, SpawnRound, Terminated, Transcript};

/// A fully scripted episode: `directors.len()` must be `rounds.len() + 1`.
#[derive(Debug, Clone)]
pub struct EpisodePlan {
    pub prompt: String,
    /// Director texts in order; the last one ends the episode with EOS.
    pub directors: Vec<String>,
    /// Worker texts per round, index order.
    pub rounds: Vec<Vec<String>>,
}

impl EpisodePlan {
    /// Exact-match rules replaying this plan, one per inference call.
    pub fn script(&self, tags: &TagConfig) -> Vec<ScriptRule> {
        assert_eq!(
            self.directors.len(),
            self.rounds.len() + 1,
            "a plan needs exactly one more director segment than rounds"
        );
        let mut rules = Vec::new();
        let mut context = self.prompt.clone();
        for (r, workers) in self.rounds.iter().enumerate() {
            rules.push(ScriptRule {
                matcher: PromptMatch::Exact(context.clone()),
                continuation: format!("{}{}", self.directors[r], tags.spawn_open),
                emits_eos: false,
            });
            context.push_str(&self.directors[r]);
            context.push_str(&tags.spawn_open);
            for (i, text) in workers.iter().enumerate() {
                let index = i + 1;
                rules.push(ScriptRule {
                    matcher: PromptMatch::Exact(format!("{context}{}", tags.worker_open(index))),
                    continuation: format!("{text}{}", tags.worker_close(index)),
                    emits_eos: false,
                });
            }
            for (i, text) in workers.iter().enumerate() {
                let index = i + 1;
                context.push_str(&tags.worker_open(index));
                context.push_str(text);
                context.push_str(&tags.worker_close(index));
            }
            context.push_str(&tags.spawn_close);
        }
        rules.push(ScriptRule {
            matcher: PromptMatch::Exact(context),
            continuation: self.directors.last().expect("final director").clone(),
            emits_eos: true,
        });
        rules
    }

    /// A scripted backend replaying this plan.
    pub fn backend(&self, tags: &TagConfig, counter: CounterHandle) -> ScriptedBackend {
        ScriptedBackend::new(self.script(tags), tags, counter)
    }

    /// The transcript a faithful orchestrator must produce from this plan,
    /// assuming the budget is never hit.
    pub fn expected_transcript(&self, counter: &dyn TokenCounter) -> Transcript {
        let mut parts = Vec::new();
        for (r, workers) in self.rounds.iter().enumerate() {
            parts.push(Part::Director(Segment::director(r, self.directors[r].clone(), counter)));
            parts.push(Part::Round(SpawnRound {
                workers: workers
                    .iter()
                    .enumerate()
                    .map(|(i, text)| Segment::worker(r + 1, i + 1, text.clone(), counter))
                    .collect(),
            }));
        }
        parts.push(Part::Director(Segment::director(
            self.rounds.len(),
            self.directors.last().expect("final director").clone(),
            counter,
        )));
        Transcript {
            prompt: self.prompt.clone(),
            parts,
            terminated: Terminated::Eos,
        }
    }

    /// Number of workers in the widest round (0 for sequential plans).
    pub fn max_workers(&self) -> usize {
        self.rounds.iter().map(Vec::len).max().unwrap_or(0)
    }
}
