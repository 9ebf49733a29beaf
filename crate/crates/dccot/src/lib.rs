//! Divide-and-conquer chain-of-thought tooling.
//!
//! A single reasoning model plays two roles: a director that thinks
//! sequentially until it finds parallelizable subtasks, and workers that each
//! take one subtask and run concurrently from the director's context. This
//! crate provides everything around that loop, model-agnostically:
//!
//! - [`transcript`]: the tagged response format, parsing, validation, and the
//!   longest-path-length / degree-of-parallelism metrics.
//! - [`orchestrator`]: the inference loop itself, built purely on a
//!   single-call generation primitive, with longest-path budget enforcement.
//! - [`backend`]: that primitive, as a scripted replayer and an HTTP client
//!   for completions-style serving engines.
//! - [`trainseq`]: packed training sequences with duplicated worker blocks,
//!   the block-sparse attention mask, position IDs, and the loss mask.
//! - [`rlmath`]: rewards, length penalties, data filters, group-normalized
//!   advantages, clipped and truncated-importance policy objectives, and the
//!   training-stage presets.
//! - [`eval`]: pass@1 and maj@k evaluation with a pluggable answer
//!   equivalence oracle, plus baseline comparison reports.

pub mod backend;
pub mod config;
pub mod counter;
pub mod eval;
pub mod orchestrator;
pub mod prompts;
pub mod rlmath;
pub mod tags;
pub mod testkit;
pub mod trainseq;
pub mod transcript;

pub use counter::{CharCounter, CounterHandle, ExternalCounter, TokenCounter, WhitespaceCounter};
pub use tags::TagConfig;
pub use transcript::{parse_transcript, validate_format, Transcript};
