//! Format compliance checking for reward computation.
//!
//! Unlike the parser, which treats tag strings inside worker text as literal,
//! the validator scans every tag occurrence anywhere in the response and
//! checks that the response spawns workers, that every open tag has a
//! matching close tag, and that blocks nest appropriately (workers directly
//! inside spawn blocks, indices consecutive from 1). It never fails: a
//! malformed response yields `format_ok = false` with findings, not an error.

use serde::{Deserialize, Serialize};

use super::Transcript;
use crate::tags::TagConfig;

/// Outcome of a format check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatReport {
    /// The response contains at least one spawn block with a worker in it.
    pub spawned_workers: bool,
    /// Every open tag is matched by the corresponding close tag.
    pub tags_balanced: bool,
    /// Blocks nest appropriately: spawn blocks at top level, worker blocks
    /// directly inside a spawn block with indices 1..=K, no stray content.
    pub tags_nested: bool,
    /// Conjunction of the three flags above.
    pub format_ok: bool,
    /// Human-readable findings for everything that went wrong.
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TagKind {
    SpawnOpen,
    SpawnClose,
    WorkerOpen(usize),
    WorkerClose(usize),
}

/// Lexes every tag occurrence in `text`, earliest-first. Overlapping
/// candidates at the same offset resolve to the longest match.
fn scan_tags(text: &str, tags: &TagConfig) -> Vec<(usize, usize, TagKind)> {
    let mut found = Vec::new();
    let bytes = text.len();
    let mut pos = 0;
    while pos < bytes {
        if !text.is_char_boundary(pos) {
            pos += 1;
            continue;
        }
        let rest = &text[pos..];
        let mut best: Option<(usize, TagKind)> = None;
        let mut consider = |len: usize, kind: TagKind| {
            if best.map_or(true, |(b, _)| len > b) {
                best = Some((len, kind));
            }
        };
        if rest.starts_with(&tags.spawn_open) {
            consider(tags.spawn_open.len(), TagKind::SpawnOpen);
        }
        if rest.starts_with(&tags.spawn_close) {
            consider(tags.spawn_close.len(), TagKind::SpawnClose);
        }
        if let Some((i, len)) = tags.match_worker_open(rest) {
            consider(len, TagKind::WorkerOpen(i));
        }
        if let Some((i, len)) = tags.match_worker_close(rest) {
            consider(len, TagKind::WorkerClose(i));
        }
        match best {
            Some((len, kind)) => {
                found.push((pos, len, kind));
                pos += len;
            }
            None => pos += 1,
        }
    }
    found
}

/// Checks the response text against the tag format.
pub fn validate_format(text: &str, tags: &TagConfig) -> FormatReport {
    let occurrences = scan_tags(text, tags);
    let mut violations = Vec::new();
    let mut balanced = true;
    let mut nested = true;
    let mut complete_workers = 0usize;

    // Bracket discipline over all tag occurrences.
    let mut stack: Vec<TagKind> = Vec::new();
    // Expected worker index per open spawn block.
    let mut expected_stack: Vec<usize> = Vec::new();
    let mut prev_end = 0usize;

    for &(pos, len, kind) in &occurrences {
        // Literal text is fine at top level and inside workers, but not
        // directly inside a spawn block between worker blocks.
        if matches!(stack.last(), Some(TagKind::SpawnOpen))
            && text[prev_end..pos].chars().any(|c| !c.is_whitespace())
        {
            nested = false;
            violations.push(format!(
                "content between worker blocks inside a spawn block at byte {prev_end}"
            ));
        }
        match kind {
            TagKind::SpawnOpen => {
                if !stack.is_empty() {
                    nested = false;
                    violations.push(format!(
                        "`{}` opened inside another block at byte {pos}",
                        tags.spawn_open
                    ));
                }
                stack.push(TagKind::SpawnOpen);
                expected_stack.push(1);
            }
            TagKind::WorkerOpen(i) => {
                match stack.last() {
                    Some(TagKind::SpawnOpen) => {
                        let expected = expected_stack.last_mut().expect("spawn tracks index");
                        if i != *expected {
                            nested = false;
                            violations.push(format!(
                                "worker {i} opened where worker {expected} was expected"
                            ));
                        }
                        *expected = i + 1;
                    }
                    _ => {
                        nested = false;
                        violations.push(format!(
                            "worker {i} opened outside a spawn block at byte {pos}"
                        ));
                    }
                }
                stack.push(TagKind::WorkerOpen(i));
            }
            TagKind::WorkerClose(i) => match stack.last() {
                Some(TagKind::WorkerOpen(open)) if *open == i => {
                    stack.pop();
                    complete_workers += 1;
                }
                Some(TagKind::WorkerOpen(open)) => {
                    balanced = false;
                    violations.push(format!(
                        "close tag for worker {i} does not match open worker {open}"
                    ));
                    stack.pop();
                }
                _ => {
                    balanced = false;
                    violations.push(format!("close tag for worker {i} has no open tag"));
                }
            },
            TagKind::SpawnClose => match stack.last() {
                Some(TagKind::SpawnOpen) => {
                    stack.pop();
                    let started_at = expected_stack.pop().expect("spawn tracks index");
                    if started_at == 1 {
                        nested = false;
                        violations.push("spawn block contains no workers".to_string());
                    }
                }
                Some(TagKind::WorkerOpen(open)) => {
                    balanced = false;
                    violations.push(format!(
                        "`{}` closes while worker {open} is still open",
                        tags.spawn_close
                    ));
                    stack.pop();
                }
                _ => {
                    balanced = false;
                    violations.push(format!("`{}` has no open tag", tags.spawn_close));
                }
            },
        }
        prev_end = pos + len;
    }

    for open in &stack {
        balanced = false;
        match open {
            TagKind::SpawnOpen => {
                violations.push(format!("`{}` is never closed", tags.spawn_open));
            }
            TagKind::WorkerOpen(i) => violations.push(format!("worker {i} is never closed")),
            _ => {}
        }
    }

    let spawned_workers = complete_workers > 0 || occurrences.iter().any(|(_, _, k)| {
        matches!(k, TagKind::SpawnOpen | TagKind::WorkerOpen(_))
    });
    if !spawned_workers {
        violations.push("response never spawns workers".to_string());
    }

    let format_ok = spawned_workers && balanced && nested;
    FormatReport {
        spawned_workers,
        tags_balanced: balanced,
        tags_nested: nested,
        format_ok,
        violations,
    }
}

/// Renders the transcript and checks the flat text.
pub fn validate_transcript(t: &Transcript, tags: &TagConfig) -> FormatReport {
    validate_format(&t.render(tags), tags)
}
