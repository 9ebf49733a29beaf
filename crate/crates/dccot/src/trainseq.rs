//! Packed training sequences for director/worker responses.
//!
//! At inference a worker's tokens exist twice in KV-cache terms: once as the
//! worker generated them (context = prompt + S1, independent of siblings) and
//! once in the director's reassembled view used to generate S2. Training
//! sequences therefore include each worker block twice — an A copy for the
//! generation view and a B copy for the reassembled view — with a
//! block-sparse attention mask keeping the A copies independent of each
//! other, position IDs that restart every A copy at the end of S1, and a loss
//! mask covering only first-occurrence policy tokens (the B copies and
//! scaffold-inserted tags carry no loss).
//!
//! Stream order per round: director text, its spawn-open tag, the A copies
//! `W1A..WKA`, then the reassembled B side `WOPEN_1 W1B WCLOSE_1 ...
//! WOPEN_K WKB WCLOSE_K SPAWN_CLOSE`, then the next director segment. The B
//! side plus the directors form one ordinary causal stream (the "director
//! flow"), which is exactly the context the director saw at inference time.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counter::TokenCounter;
use crate::tags::TagConfig;
use crate::transcript::{Part, Transcript};

/// Cap used by the batch pipeline to flag over-long sequences.
pub const DEFAULT_MAX_LEN: usize = 10_000;

/// Who put the tokens in the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockOrigin {
    /// Sampled from the policy (directors, worker text, the spawn-open tag).
    PolicyGenerated,
    /// Inserted by the orchestrator scaffold (prompt, worker tags, spawn-close).
    ScaffoldInserted,
}

/// Identity of one block in the packed stream. Rounds and worker indices are
/// 1-based; directors are numbered in order of appearance (`S1` opens the
/// response).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockName {
    Prompt,
    Director { ordinal: usize },
    SpawnOpen { round: usize },
    WorkerA { round: usize, index: usize },
    WorkerOpen { round: usize, index: usize },
    WorkerB { round: usize, index: usize },
    WorkerClose { round: usize, index: usize },
    SpawnClose { round: usize },
}

impl BlockName {
    /// Blocks on the ordinary causal stream the director sees. Only the A
    /// copies live outside it.
    pub fn is_director_flow(self) -> bool {
        !matches!(self, BlockName::WorkerA { .. })
    }

    /// First-occurrence policy tokens: these carry loss.
    pub fn carries_loss(self) -> bool {
        matches!(
            self,
            BlockName::Director { .. } | BlockName::SpawnOpen { .. } | BlockName::WorkerA { .. }
        )
    }

    pub fn origin(self) -> BlockOrigin {
        match self {
            BlockName::Director { .. }
            | BlockName::SpawnOpen { .. }
            | BlockName::WorkerA { .. }
            | BlockName::WorkerB { .. } => BlockOrigin::PolicyGenerated,
            BlockName::Prompt
            | BlockName::WorkerOpen { .. }
            | BlockName::WorkerClose { .. }
            | BlockName::SpawnClose { .. } => BlockOrigin::ScaffoldInserted,
        }
    }
}

impl fmt::Display for BlockName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockName::Prompt => write!(f, "PROMPT"),
            BlockName::Director { ordinal } => write!(f, "S{ordinal}"),
            BlockName::SpawnOpen { round } => write!(f, "SPAWN_OPEN@{round}"),
            BlockName::WorkerA { round, index } => write!(f, "W{index}A@{round}"),
            BlockName::WorkerOpen { round, index } => write!(f, "WOPEN{index}@{round}"),
            BlockName::WorkerB { round, index } => write!(f, "W{index}B@{round}"),
            BlockName::WorkerClose { round, index } => write!(f, "WCLOSE{index}@{round}"),
            BlockName::SpawnClose { round } => write!(f, "SPAWN_CLOSE@{round}"),
        }
    }
}

/// One block's place in the packed token stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutEntry {
    pub name: BlockName,
    /// Token span `[start, end)` in the stream.
    pub span: Range<usize>,
    pub origin: BlockOrigin,
}

impl LayoutEntry {
    pub fn len(&self) -> usize {
        self.span.end - self.span.start
    }

    pub fn is_empty(&self) -> bool {
        self.span.is_empty()
    }
}

/// Block-level visibility: `matrix[q][k]` says whether tokens in block `q`
/// may attend to tokens in block `k` (within-block attention is causal).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttentionMaskSpec {
    pub matrix: Vec<Vec<bool>>,
}

/// A transcript packed for training: per-block text, spans, the block-sparse
/// mask, per-token position IDs, and the per-token loss mask.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedSequence {
    /// Text of each block, aligned with `layout`.
    pub text_segments: Vec<String>,
    pub layout: Vec<LayoutEntry>,
    pub mask: AttentionMaskSpec,
    pub position_ids: Vec<usize>,
    pub loss_mask: Vec<bool>,
    /// Total tokens in the stream (prompt + directors + 2x workers + tags).
    pub total_tokens: usize,
}

#[derive(Debug, Error)]
pub enum TrainSeqError {
    #[error("dense expansion of {tokens} tokens exceeds the cap of {cap}")]
    SizeLimit { tokens: usize, cap: usize },
}

/// Packs a transcript into a training sequence.
pub fn build_training_sequence(
    t: &Transcript,
    tags: &TagConfig,
    counter: &dyn TokenCounter,
) -> PackedSequence {
    let mut names: Vec<BlockName> = Vec::new();
    let mut texts: Vec<String> = Vec::new();
    let mut lens: Vec<usize> = Vec::new();
    let mut push = |name: BlockName, text: String, len: usize| {
        names.push(name);
        texts.push(text);
        lens.push(len);
    };

    push(BlockName::Prompt, t.prompt.clone(), counter.count(&t.prompt));

    let mut director_ordinal = 0;
    let mut round = 0;
    let total_parts = t.parts.len();
    for (p, part) in t.parts.iter().enumerate() {
        match part {
            Part::Director(seg) => {
                director_ordinal += 1;
                push(
                    BlockName::Director {
                        ordinal: director_ordinal,
                    },
                    seg.text.clone(),
                    seg.length,
                );
                // The spawn tag the director emitted, when a round follows.
                if p + 1 < total_parts {
                    push(
                        BlockName::SpawnOpen { round: round + 1 },
                        tags.spawn_open.clone(),
                        counter.count(&tags.spawn_open),
                    );
                }
            }
            Part::Round(r) => {
                round += 1;
                for w in &r.workers {
                    let index = w.worker_index.expect("worker index");
                    push(BlockName::WorkerA { round, index }, w.text.clone(), w.length);
                }
                for w in &r.workers {
                    let index = w.worker_index.expect("worker index");
                    let open = tags.worker_open(index);
                    let close = tags.worker_close(index);
                    let open_len = counter.count(&open);
                    let close_len = counter.count(&close);
                    push(BlockName::WorkerOpen { round, index }, open, open_len);
                    push(BlockName::WorkerB { round, index }, w.text.clone(), w.length);
                    push(BlockName::WorkerClose { round, index }, close, close_len);
                }
                push(
                    BlockName::SpawnClose { round },
                    tags.spawn_close.clone(),
                    counter.count(&tags.spawn_close),
                );
            }
        }
    }

    let mut layout = Vec::with_capacity(names.len());
    let mut offset = 0;
    for (name, len) in names.iter().zip(&lens) {
        layout.push(LayoutEntry {
            name: *name,
            span: offset..offset + len,
            origin: name.origin(),
        });
        offset += len;
    }

    let mask = build_attention_mask(&layout);
    let position_ids = build_position_ids(&layout);
    let loss_mask = build_loss_mask(&layout);

    PackedSequence {
        text_segments: texts,
        layout,
        mask,
        position_ids,
        loss_mask,
        total_tokens: offset,
    }
}

/// Block-level visibility for a layout: every block sees the director flow
/// before it plus itself; nothing ever sees an A copy other than itself.
pub fn build_attention_mask(layout: &[LayoutEntry]) -> AttentionMaskSpec {
    let n = layout.len();
    let mut matrix = vec![vec![false; n]; n];
    for (q, row) in matrix.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            *cell = (k < q && layout[k].name.is_director_flow()) || k == q;
        }
    }
    AttentionMaskSpec { matrix }
}

/// Per-token position IDs.
///
/// The director flow is one consecutive causal stream starting at 0 with the
/// prompt. Each A copy restarts at the flow position right after the round's
/// spawn-open tag, offset by the width of the worker's own open tag (zero in
/// layouts without tag blocks), which reproduces the positions the worker saw
/// while generating.
pub fn build_position_ids(layout: &[LayoutEntry]) -> Vec<usize> {
    let total: usize = layout.iter().map(LayoutEntry::len).sum();
    let mut positions = Vec::with_capacity(total);
    let mut cursor = 0usize;
    for entry in layout {
        let start = match entry.name {
            BlockName::WorkerA { round, index } => {
                let open_len = layout
                    .iter()
                    .find(|e| e.name == (BlockName::WorkerOpen { round, index }))
                    .map_or(0, LayoutEntry::len);
                cursor + open_len
            }
            _ => cursor,
        };
        positions.extend(start..start + entry.len());
        if entry.name.is_director_flow() {
            cursor += entry.len();
        }
    }
    positions
}

/// Per-token loss mask: true exactly on first-occurrence policy blocks
/// (directors, spawn-open tags, A copies).
pub fn build_loss_mask(layout: &[LayoutEntry]) -> Vec<bool> {
    let mut mask = Vec::new();
    for entry in layout {
        mask.extend(std::iter::repeat_n(entry.name.carries_loss(), entry.len()));
    }
    mask
}

/// Materializes the token-level mask: block visibility combined with
/// within-block causality. `mask[p][c]` says whether the query token at
/// stream position `p` attends to the key token at position `c`.
pub fn expand_dense(
    mask: &AttentionMaskSpec,
    layout: &[LayoutEntry],
    cap: usize,
) -> Result<Vec<Vec<bool>>, TrainSeqError> {
    let total: usize = layout.iter().map(LayoutEntry::len).sum();
    if total > cap {
        return Err(TrainSeqError::SizeLimit { tokens: total, cap });
    }
    let block_of: Vec<usize> = layout
        .iter()
        .enumerate()
        .flat_map(|(b, e)| std::iter::repeat_n(b, e.len()))
        .collect();
    let mut dense = vec![vec![false; total]; total];
    for p in 0..total {
        for c in 0..=p {
            let (bp, bc) = (block_of[p], block_of[c]);
            dense[p][c] = if bp == bc {
                true // c <= p by loop bounds
            } else {
                mask.matrix[bp][bc]
            };
        }
    }
    Ok(dense)
}

impl PackedSequence {
    /// Whether the stream exceeds a training length cap.
    pub fn over_length(&self, cap: usize) -> bool {
        self.total_tokens > cap
    }

    /// Concatenated text of the blocks visible to block `q`, in stream order,
    /// excluding `q` itself. With `include_scaffold` false, scaffold tag
    /// blocks are skipped (the prompt is always included).
    pub fn visible_text(&self, q: usize, include_scaffold: bool) -> String {
        let mut out = String::new();
        for (k, entry) in self.layout.iter().enumerate().take(q) {
            if !self.mask.matrix[q][k] {
                continue;
            }
            let keep = include_scaffold
                || entry.name == BlockName::Prompt
                || entry.origin == BlockOrigin::PolicyGenerated;
            if keep {
                out.push_str(&self.text_segments[k]);
            }
        }
        out
    }

    /// Serializable artifact form.
    pub fn to_json(&self, max_len: usize) -> PackedSequenceJson {
        PackedSequenceJson {
            text_segments: self.text_segments.clone(),
            layout: self
                .layout
                .iter()
                .map(|e| LayoutEntryJson {
                    name: e.name.to_string(),
                    start: e.span.start,
                    end: e.span.end,
                    origin: e.origin,
                })
                .collect(),
            visibility: self.mask.matrix.clone(),
            position_ids: self.position_ids.clone(),
            loss_mask: self.loss_mask.clone(),
            total_tokens: self.total_tokens,
            over_max_len: self.over_length(max_len),
        }
    }
}

/// Artifact schema for one packed sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PackedSequenceJson {
    pub text_segments: Vec<String>,
    pub layout: Vec<LayoutEntryJson>,
    pub visibility: Vec<Vec<bool>>,
    pub position_ids: Vec<usize>,
    pub loss_mask: Vec<bool>,
    pub total_tokens: usize,
    pub over_max_len: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayoutEntryJson {
    pub name: String,
    pub start: usize,
    pub end: usize,
    pub origin: BlockOrigin,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counter::WhitespaceCounter;
    use crate::transcript::{Segment, SpawnRound, Terminated};

    const C: WhitespaceCounter = WhitespaceCounter;

    fn words(prefix: &str, n: usize) -> String {
        (0..n)
            .map(|i| format!("{prefix}{i}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn transcript(prompt_words: usize, s1: usize, workers: &[usize], s2: usize) -> Transcript {
        Transcript {
            prompt: words("p", prompt_words),
            parts: vec![
                Part::Director(Segment::director(0, words("s", s1), &C)),
                Part::Round(SpawnRound {
                    workers: workers
                        .iter()
                        .enumerate()
                        .map(|(i, &n)| {
                            Segment::worker(1, i + 1, words(&format!("w{}x", i + 1), n), &C)
                        })
                        .collect(),
                }),
                Part::Director(Segment::director(1, words("t", s2), &C)),
            ],
            terminated: Terminated::Eos,
        }
    }

    /// Tag-free layout matching the bare block arithmetic of the position-ID
    /// rule: PROMPT, S1, A copies, B copies, S2.
    fn bare_layout(prompt: usize, s1: usize, workers: &[usize], s2: usize) -> Vec<LayoutEntry> {
        let mut names = vec![
            (BlockName::Prompt, prompt),
            (BlockName::Director { ordinal: 1 }, s1),
        ];
        for (i, &w) in workers.iter().enumerate() {
            names.push((BlockName::WorkerA { round: 1, index: i + 1 }, w));
        }
        for (i, &w) in workers.iter().enumerate() {
            names.push((BlockName::WorkerB { round: 1, index: i + 1 }, w));
        }
        names.push((BlockName::Director { ordinal: 2 }, s2));
        let mut offset = 0;
        names
            .into_iter()
            .map(|(name, len)| {
                let e = LayoutEntry {
                    name,
                    span: offset..offset + len,
                    origin: name.origin(),
                };
                offset += len;
                e
            })
            .collect()
    }

    fn find(seq: &PackedSequence, name: BlockName) -> &LayoutEntry {
        seq.layout
            .iter()
            .find(|e| e.name == name)
            .unwrap_or_else(|| panic!("block {name} missing"))
    }

    #[test]
    fn position_ids_follow_the_worker_restart_rule() {
        // PROMPT=4, S1=2, workers 3/5/2 with no tag blocks: every A copy
        // starts at 6, W1B at 6, W2B at 9, W3B at 14, S2 at 16.
        let layout = bare_layout(4, 2, &[3, 5, 2], 4);
        let pos = build_position_ids(&layout);
        let start = |name: BlockName| {
            let e = layout.iter().find(|e| e.name == name).unwrap();
            pos[e.span.start]
        };
        assert_eq!(start(BlockName::Prompt), 0);
        assert_eq!(start(BlockName::Director { ordinal: 1 }), 4);
        for index in 1..=3 {
            assert_eq!(start(BlockName::WorkerA { round: 1, index }), 6);
        }
        assert_eq!(start(BlockName::WorkerB { round: 1, index: 1 }), 6);
        assert_eq!(start(BlockName::WorkerB { round: 1, index: 2 }), 9);
        assert_eq!(start(BlockName::WorkerB { round: 1, index: 3 }), 14);
        assert_eq!(start(BlockName::Director { ordinal: 2 }), 16);
    }

    #[test]
    fn positions_within_blocks_are_consecutive() {
        let seq =
            build_training_sequence(&transcript(2, 2, &[1, 2, 1], 2), &TagConfig::default(), &C);
        for e in &seq.layout {
            for (off, p) in seq.position_ids[e.span.clone()].iter().enumerate() {
                assert_eq!(*p, seq.position_ids[e.span.start] + off, "{}", e.name);
            }
        }
    }

    #[test]
    fn positions_with_tags_match_inference_exactly() {
        // Whitespace counting makes each tag one token. Director flow:
        // P(2) S1(2) spawn(1), so A copies start after their 1-token open tag.
        let seq = build_training_sequence(&transcript(2, 2, &[3, 5], 2), &TagConfig::default(), &C);
        let pos_start = |name: BlockName| seq.position_ids[find(&seq, name).span.start];
        let a1 = pos_start(BlockName::WorkerA { round: 1, index: 1 });
        let a2 = pos_start(BlockName::WorkerA { round: 1, index: 2 });
        let b1 = pos_start(BlockName::WorkerB { round: 1, index: 1 });
        assert_eq!(a1, 2 + 2 + 1 + 1);
        assert_eq!(a1, a2);
        assert_eq!(a1, b1);
        // The director flow continues causally: W2B starts after WCLOSE1 and
        // WOPEN2.
        let b2 = pos_start(BlockName::WorkerB { round: 1, index: 2 });
        assert_eq!(b2, b1 + 3 + 1 + 1);
    }

    #[test]
    fn a_and_b_spans_have_equal_length() {
        let seq =
            build_training_sequence(&transcript(1, 2, &[4, 0, 2], 1), &TagConfig::default(), &C);
        for index in 1..=3 {
            let a = find(&seq, BlockName::WorkerA { round: 1, index }).len();
            let b = find(&seq, BlockName::WorkerB { round: 1, index }).len();
            assert_eq!(a, b, "worker {index}");
        }
    }

    #[test]
    fn spans_are_contiguous_and_cover_the_stream() {
        let seq = build_training_sequence(&transcript(2, 1, &[2, 2], 3), &TagConfig::default(), &C);
        let mut expect = 0;
        for e in &seq.layout {
            assert_eq!(e.span.start, expect, "{}", e.name);
            expect = e.span.end;
        }
        assert_eq!(expect, seq.total_tokens);
        assert_eq!(seq.position_ids.len(), seq.total_tokens);
        assert_eq!(seq.loss_mask.len(), seq.total_tokens);
    }

    #[test]
    fn content_token_accounting() {
        // Content tokens: prompt 1 + S1 2 + workers 3 duplicated + S2 2.
        let seq =
            build_training_sequence(&transcript(1, 2, &[1, 1, 1], 2), &TagConfig::default(), &C);
        let content: usize = seq
            .layout
            .iter()
            .filter(|e| {
                !matches!(
                    e.name,
                    BlockName::SpawnOpen { .. }
                        | BlockName::WorkerOpen { .. }
                        | BlockName::WorkerClose { .. }
                        | BlockName::SpawnClose { .. }
                )
            })
            .map(LayoutEntry::len)
            .sum();
        assert_eq!(content, 1 + 2 + 3 + 3 + 2);
        // Tags: spawn_open + 3 opens + 3 closes + spawn_close, one token each.
        assert_eq!(seq.total_tokens, content + 8);
    }

    #[test]
    fn zero_round_transcript_is_plain_causal_lm() {
        let t = Transcript {
            prompt: words("p", 3),
            parts: vec![Part::Director(Segment::director(0, words("s", 4), &C))],
            terminated: Terminated::Eos,
        };
        let seq = build_training_sequence(&t, &TagConfig::default(), &C);
        assert_eq!(seq.layout.len(), 2);
        assert_eq!(seq.layout[0].name, BlockName::Prompt);
        assert_eq!(seq.layout[1].name, BlockName::Director { ordinal: 1 });
        let dense = expand_dense(&seq.mask, &seq.layout, 100).unwrap();
        for p in 0..7 {
            for c in 0..7 {
                assert_eq!(dense[p][c], c <= p, "({p},{c})");
            }
        }
        assert_eq!(
            seq.loss_mask,
            vec![false, false, false, true, true, true, true]
        );
    }

    #[test]
    fn mask_isolates_a_copies_and_hides_them_from_s2() {
        let seq =
            build_training_sequence(&transcript(2, 2, &[1, 1, 1], 2), &TagConfig::default(), &C);
        let idx = |name: BlockName| {
            seq.layout
                .iter()
                .position(|e| e.name == name)
                .unwrap_or_else(|| panic!("block {name} missing"))
        };
        let m = &seq.mask.matrix;
        let w1a = idx(BlockName::WorkerA { round: 1, index: 1 });
        let w2a = idx(BlockName::WorkerA { round: 1, index: 2 });
        let w1b = idx(BlockName::WorkerB { round: 1, index: 1 });
        let s1 = idx(BlockName::Director { ordinal: 1 });
        let s2 = idx(BlockName::Director { ordinal: 2 });
        let spawn = idx(BlockName::SpawnOpen { round: 1 });
        let prompt = idx(BlockName::Prompt);

        // A copies see the prompt, S1 and its spawn tag, and themselves only.
        assert!(m[w1a][prompt] && m[w1a][s1] && m[w1a][spawn] && m[w1a][w1a]);
        assert!(!m[w2a][w1a], "sibling A copies must not see each other");
        assert!(!m[w1b][w1a], "B copies must not see A copies");

        // S2 sees the reassembled view, never the A copies.
        assert!(m[s2][w1b]);
        assert!(!m[s2][w1a]);
        assert!(m[s2][idx(BlockName::SpawnClose { round: 1 })]);

        // No forward visibility at block level.
        for q in 0..m.len() {
            for k in q + 1..m.len() {
                assert!(!m[q][k], "({q},{k})");
            }
        }
    }

    #[test]
    fn dense_expansion_matches_block_rules() {
        let seq =
            build_training_sequence(&transcript(2, 2, &[1, 1, 1], 2), &TagConfig::default(), &C);
        let dense = expand_dense(&seq.mask, &seq.layout, 1000).unwrap();
        let span = |name: BlockName| find(&seq, name).span.clone();

        let s2 = span(BlockName::Director { ordinal: 2 });
        let w1a = span(BlockName::WorkerA { round: 1, index: 1 });
        let w1b = span(BlockName::WorkerB { round: 1, index: 1 });
        let w2a = span(BlockName::WorkerA { round: 1, index: 2 });
        assert!(dense[s2.start][w1b.start]);
        assert!(!dense[s2.start][w1a.start]);
        assert!(!dense[w2a.start][w1a.start]);
        // Upper triangle empty.
        for p in 0..seq.total_tokens {
            for c in p + 1..seq.total_tokens {
                assert!(!dense[p][c]);
            }
        }
        // Within-block causality on a multi-token block.
        let s1 = span(BlockName::Director { ordinal: 1 });
        assert!(dense[s1.start + 1][s1.start]);
        assert!(!dense[s1.start][s1.start + 1]);
    }

    #[test]
    fn dense_expansion_respects_cap() {
        let seq =
            build_training_sequence(&transcript(2, 2, &[1, 1, 1], 2), &TagConfig::default(), &C);
        assert!(matches!(
            expand_dense(&seq.mask, &seq.layout, 3),
            Err(TrainSeqError::SizeLimit { .. })
        ));
    }

    #[test]
    fn loss_lands_on_first_occurrence_policy_blocks_only() {
        let seq = build_training_sequence(&transcript(2, 2, &[2, 1], 2), &TagConfig::default(), &C);
        for e in &seq.layout {
            let expected = matches!(
                e.name,
                BlockName::Director { .. } | BlockName::SpawnOpen { .. } | BlockName::WorkerA { .. }
            );
            for p in e.span.clone() {
                assert_eq!(seq.loss_mask[p], expected, "{} token {p}", e.name);
            }
        }
    }

    #[test]
    fn two_rounds_chain_the_pattern() {
        let t = Transcript {
            prompt: words("p", 2),
            parts: vec![
                Part::Director(Segment::director(0, words("a", 2), &C)),
                Part::Round(SpawnRound {
                    workers: vec![
                        Segment::worker(1, 1, words("b", 2), &C),
                        Segment::worker(1, 2, words("c", 1), &C),
                    ],
                }),
                Part::Director(Segment::director(1, words("d", 1), &C)),
                Part::Round(SpawnRound {
                    workers: vec![
                        Segment::worker(2, 1, words("e", 1), &C),
                        Segment::worker(2, 2, words("f", 3), &C),
                    ],
                }),
                Part::Director(Segment::director(2, words("g", 2), &C)),
            ],
            terminated: Terminated::Eos,
        };
        let seq = build_training_sequence(&t, &TagConfig::default(), &C);
        let idx = |name: BlockName| seq.layout.iter().position(|e| e.name == name).unwrap();
        let m = &seq.mask.matrix;

        // Round-2 A copies see everything on the director flow through S2's
        // spawn tag, but no A copy of round 1 and no sibling.
        let r2a = idx(BlockName::WorkerA { round: 2, index: 1 });
        assert!(m[r2a][idx(BlockName::Director { ordinal: 2 })]);
        assert!(m[r2a][idx(BlockName::SpawnOpen { round: 2 })]);
        assert!(m[r2a][idx(BlockName::WorkerB { round: 1, index: 2 })]);
        assert!(m[r2a][idx(BlockName::SpawnClose { round: 1 })]);
        assert!(!m[r2a][idx(BlockName::WorkerA { round: 1, index: 1 })]);
        assert!(!m[r2a][idx(BlockName::WorkerA { round: 2, index: 2 })]);

        // S3 sees both rounds' B sides and neither round's A copies.
        let s3 = idx(BlockName::Director { ordinal: 3 });
        assert!(m[s3][idx(BlockName::WorkerB { round: 2, index: 1 })]);
        assert!(!m[s3][idx(BlockName::WorkerA { round: 2, index: 1 })]);
        assert!(!m[s3][idx(BlockName::WorkerA { round: 1, index: 1 })]);
    }

    #[test]
    fn over_length_flagging() {
        let seq = build_training_sequence(&transcript(1, 1, &[1], 1), &TagConfig::default(), &C);
        assert!(!seq.over_length(DEFAULT_MAX_LEN));
        assert!(seq.over_length(3));
    }

    #[test]
    fn artifact_json_shape() {
        let seq = build_training_sequence(&transcript(1, 1, &[1], 1), &TagConfig::default(), &C);
        let v = serde_json::to_value(seq.to_json(DEFAULT_MAX_LEN)).unwrap();
        assert!(v["text_segments"].is_array());
        assert_eq!(v["layout"][0]["name"], "PROMPT");
        assert_eq!(v["layout"][0]["origin"], "scaffold_inserted");
        assert_eq!(v["layout"][1]["name"], "S1");
        assert_eq!(v["layout"][1]["origin"], "policy_generated");
        assert_eq!(
            v["visibility"].as_array().unwrap().len(),
            v["layout"].as_array().unwrap().len()
        );
        assert_eq!(v["over_max_len"], false);
        assert_eq!(
            v["position_ids"].as_array().unwrap().len(),
            v["total_tokens"].as_u64().unwrap() as usize
        );
    }

    #[test]
    fn rebuild_is_idempotent() {
        let t = transcript(2, 2, &[2, 3], 1);
        let a = build_training_sequence(&t, &TagConfig::default(), &C);
        let b = build_training_sequence(&t, &TagConfig::default(), &C);
        assert_eq!(a, b);
        assert_eq!(build_attention_mask(&a.layout), a.mask);
        assert_eq!(build_position_ids(&a.layout), a.position_ids);
        assert_eq!(build_loss_mask(&a.layout), a.loss_mask);
    }
}
