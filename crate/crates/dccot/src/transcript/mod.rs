//! The structured form of a director/worker response.
//!
//! A [`Transcript`] is an alternating sequence of director segments and spawn
//! rounds, always starting and ending with a director segment (possibly
//! empty). Zero rounds is a fully sequential response. Segment text never
//! contains the delimiting tags: [`render`] inserts them and [`parse`] strips
//! them, so `parse(render(t)) == t` for any transcript the orchestrator can
//! produce.
//!
//! Lengths are token counts of the segment text alone. Tag tokens are
//! framework scaffolding and never count toward segment lengths or the
//! longest-path metrics.

mod parse;
mod validate;

pub use parse::{parse_transcript, ParseError};
pub use validate::{validate_format, validate_transcript, FormatReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counter::TokenCounter;
use crate::tags::TagConfig;

/// Who generated a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Director,
    Worker,
}

/// A contiguous run of generated text belonging to one role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub role: Role,
    /// For directors: rounds completed before this segment (0 for the opening
    /// text). For workers: the 1-based round they belong to.
    pub round_index: usize,
    /// 1-based worker index, present exactly for worker segments.
    pub worker_index: Option<usize>,
    /// The generated text, with no tag strings.
    pub text: String,
    /// Token count of `text` under the counter active at construction.
    pub length: usize,
}

impl Segment {
    pub fn director(round_index: usize, text: impl Into<String>, counter: &dyn TokenCounter) -> Self {
        let text = text.into();
        let length = counter.count(&text);
        Self {
            role: Role::Director,
            round_index,
            worker_index: None,
            text,
            length,
        }
    }

    pub fn worker(
        round_index: usize,
        worker_index: usize,
        text: impl Into<String>,
        counter: &dyn TokenCounter,
    ) -> Self {
        let text = text.into();
        let length = counter.count(&text);
        Self {
            role: Role::Worker,
            round_index,
            worker_index: Some(worker_index),
            text,
            length,
        }
    }
}

/// One round of parallel generation: K ≥ 1 workers, indexed 1..=K.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpawnRound {
    pub workers: Vec<Segment>,
}

impl SpawnRound {
    /// Longest worker in the round, in tokens.
    pub fn max_worker_len(&self) -> usize {
        self.workers.iter().map(|w| w.length).max().unwrap_or(0)
    }

    /// Total tokens across all workers in the round.
    pub fn total_worker_len(&self) -> usize {
        self.workers.iter().map(|w| w.length).sum()
    }
}

/// Why generation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminated {
    Eos,
    BudgetExhausted,
}

/// One element of the alternating director/round sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Part {
    Director(Segment),
    Round(SpawnRound),
}

/// A parsed response: prompt, alternating parts, and the termination cause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub prompt: String,
    /// Alternates director, round, director, ..., director. Never empty;
    /// first and last entries are always directors.
    pub parts: Vec<Part>,
    pub terminated: Terminated,
}

/// Metric errors.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("degree of parallelism is undefined for a zero-length transcript")]
    ZeroLength,
}

impl Transcript {
    /// A transcript holding a single director segment.
    pub fn sequential(
        prompt: impl Into<String>,
        text: impl Into<String>,
        terminated: Terminated,
        counter: &dyn TokenCounter,
    ) -> Self {
        Self {
            prompt: prompt.into(),
            parts: vec![Part::Director(Segment::director(0, text, counter))],
            terminated,
        }
    }

    pub fn with_prompt(mut self, prompt: impl Into<String>) -> Self {
        self.prompt = prompt.into();
        self
    }

    pub fn with_terminated(mut self, terminated: Terminated) -> Self {
        self.terminated = terminated;
        self
    }

    /// Director segments in order.
    pub fn directors(&self) -> impl Iterator<Item = &Segment> {
        self.parts.iter().filter_map(|p| match p {
            Part::Director(s) => Some(s),
            Part::Round(_) => None,
        })
    }

    /// Spawn rounds in order.
    pub fn rounds(&self) -> impl Iterator<Item = &SpawnRound> {
        self.parts.iter().filter_map(|p| match p {
            Part::Round(r) => Some(r),
            Part::Director(_) => None,
        })
    }

    /// Number of spawn rounds.
    pub fn round_count(&self) -> usize {
        self.rounds().count()
    }

    /// Checks the alternation invariant: director first and last, rounds and
    /// directors strictly alternating, worker indices 1..=K per round.
    pub fn check_shape(&self) -> Result<(), String> {
        if self.parts.is_empty() {
            return Err("transcript has no parts".into());
        }
        for (i, part) in self.parts.iter().enumerate() {
            let want_director = i.is_multiple_of(2);
            match part {
                Part::Director(_) if want_director => {}
                Part::Round(r) if !want_director => {
                    if r.workers.is_empty() {
                        return Err(format!("round at part {i} has no workers"));
                    }
                    for (k, w) in r.workers.iter().enumerate() {
                        if w.worker_index != Some(k + 1) {
                            return Err(format!(
                                "round at part {i}: worker {} has index {:?}",
                                k + 1,
                                w.worker_index
                            ));
                        }
                    }
                }
                _ => return Err(format!("part {i} breaks director/round alternation")),
            }
        }
        if self.parts.len().is_multiple_of(2) {
            return Err("transcript must end with a director segment".into());
        }
        Ok(())
    }

    /// Tokens on the longest start-to-end path: every director segment plus
    /// the longest worker of each round.
    pub fn longest_path_length(&self) -> usize {
        let directors: usize = self.directors().map(|s| s.length).sum();
        let rounds: usize = self.rounds().map(SpawnRound::max_worker_len).sum();
        directors + rounds
    }

    /// Total generated tokens: every director segment plus every worker.
    pub fn total_tokens(&self) -> usize {
        let directors: usize = self.directors().map(|s| s.length).sum();
        let rounds: usize = self.rounds().map(SpawnRound::total_worker_len).sum();
        directors + rounds
    }

    /// Total tokens divided by longest path length. 1.0 for a sequential
    /// response, approaching K when all K workers run equally long.
    pub fn degree_of_parallelism(&self) -> Result<f64, MetricError> {
        let lpl = self.longest_path_length();
        if lpl == 0 {
            return Err(MetricError::ZeroLength);
        }
        Ok(self.total_tokens() as f64 / lpl as f64)
    }

    /// Flattens the transcript back to response text, inserting tags in
    /// generation order: director text, then per round the spawn-open tag,
    /// each worker wrapped in its open/close tags, and the spawn-close tag.
    pub fn render(&self, tags: &TagConfig) -> String {
        let mut out = String::new();
        for part in &self.parts {
            match part {
                Part::Director(s) => out.push_str(&s.text),
                Part::Round(r) => {
                    out.push_str(&tags.spawn_open);
                    for w in &r.workers {
                        out.push_str(&tags.worker_open(w.worker_index.expect("worker index")));
                        out.push_str(&w.text);
                        out.push_str(&tags.worker_close(w.worker_index.expect("worker index")));
                    }
                    out.push_str(&tags.spawn_close);
                }
            }
        }
        out
    }

    /// Canonical JSON interchange form.
    pub fn to_json(&self) -> TranscriptJson {
        TranscriptJson {
            prompt: self.prompt.clone(),
            terminated: self.terminated,
            parts: self
                .parts
                .iter()
                .map(|p| match p {
                    Part::Director(s) => PartJson::Director {
                        text: s.text.clone(),
                    },
                    Part::Round(r) => PartJson::Round {
                        workers: r
                            .workers
                            .iter()
                            .map(|w| WorkerJson {
                                index: w.worker_index.expect("worker index"),
                                text: w.text.clone(),
                            })
                            .collect(),
                    },
                })
                .collect(),
        }
    }

    /// Rebuilds a transcript from the interchange form, recomputing segment
    /// lengths with `counter`.
    pub fn from_json(json: &TranscriptJson, counter: &dyn TokenCounter) -> Result<Self, String> {
        let mut parts = Vec::with_capacity(json.parts.len());
        let mut round_index = 0;
        for part in &json.parts {
            match part {
                PartJson::Director { text } => {
                    parts.push(Part::Director(Segment::director(round_index, text.clone(), counter)));
                }
                PartJson::Round { workers } => {
                    round_index += 1;
                    let workers = workers
                        .iter()
                        .map(|w| Segment::worker(round_index, w.index, w.text.clone(), counter))
                        .collect();
                    parts.push(Part::Round(SpawnRound { workers }));
                }
            }
        }
        let t = Self {
            prompt: json.prompt.clone(),
            parts,
            terminated: json.terminated,
        };
        t.check_shape()?;
        Ok(t)
    }
}

/// Serialized transcript: `{"prompt", "terminated", "parts": [...]}` with
/// parts tagged by `"kind"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptJson {
    pub prompt: String,
    pub terminated: Terminated,
    pub parts: Vec<PartJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartJson {
    Director { text: String },
    Round { workers: Vec<WorkerJson> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkerJson {
    pub index: usize,
    pub text: String,
}
