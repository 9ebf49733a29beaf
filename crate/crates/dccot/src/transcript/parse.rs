//! Parsing flat response text into a [`Transcript`].
//!
//! The grammar mirrors what the orchestrator emits: director text runs until
//! the spawn-open tag, a round is worker blocks `1..=K` back to back followed
//! by the spawn-close tag, and worker text runs until that worker's own close
//! tag. Inside a worker, every other tag string is literal text (a worker may
//! well print `<spawn_workers>` without spawning anything). Inside director
//! text, everything except the spawn-open tag is literal.

use thiserror::Error;

use super::{Part, Segment, SpawnRound, Terminated, Transcript};
use crate::counter::TokenCounter;
use crate::tags::TagConfig;

/// Structural errors raised on malformed response text.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    /// An opened block is never closed.
    #[error("unbalanced tags: {0}")]
    UnbalancedTags(String),
    /// Blocks overlap instead of nesting (e.g. a spawn block opened inside a round).
    #[error("crossed nesting: {0}")]
    CrossedNesting(String),
    /// Worker indices inside a round are not consecutive from 1.
    #[error("worker index gap: expected worker {expected}, found worker {found}")]
    WorkerIndexGap { expected: usize, found: usize },
    /// A close tag appears where no matching block is open.
    #[error("stray close tag: {0}")]
    StrayClose(String),
    /// Literal text where the round structure requires a tag.
    #[error("unexpected content: {0}")]
    UnexpectedContent(String),
}

/// Parses response text into a transcript with an empty prompt and
/// `terminated = Eos`; callers that know better attach the real values with
/// [`Transcript::with_prompt`] / [`Transcript::with_terminated`].
///
/// Director text must not contain the spawn-open tag as literal text (the
/// orchestrator guarantees this: director inference stops there), and worker
/// `i` must not contain its own close tag; every other tag collision is
/// handled as literal text.
pub fn parse_transcript(
    text: &str,
    tags: &TagConfig,
    counter: &dyn TokenCounter,
) -> Result<Transcript, ParseError> {
    let mut parts: Vec<Part> = Vec::new();
    let mut rest = text;
    let mut round_index = 0;

    loop {
        match rest.find(&tags.spawn_open) {
            None => {
                parts.push(Part::Director(Segment::director(round_index, rest, counter)));
                break;
            }
            Some(pos) => {
                parts.push(Part::Director(Segment::director(
                    round_index,
                    &rest[..pos],
                    counter,
                )));
                rest = &rest[pos + tags.spawn_open.len()..];
                round_index += 1;
                let (round, remaining) = parse_round(rest, tags, counter, round_index)?;
                parts.push(Part::Round(round));
                rest = remaining;
            }
        }
    }

    Ok(Transcript {
        prompt: String::new(),
        parts,
        terminated: Terminated::Eos,
    })
}

/// Parses one round body (the text after a spawn-open tag) up to and
/// including the spawn-close tag.
fn parse_round<'a>(
    mut rest: &'a str,
    tags: &TagConfig,
    counter: &dyn TokenCounter,
    round_index: usize,
) -> Result<(SpawnRound, &'a str), ParseError> {
    let mut workers: Vec<Segment> = Vec::new();
    let mut expected = 1;

    loop {
        if let Some((index, tag_len)) = tags.match_worker_open(rest) {
            if index != expected {
                return Err(ParseError::WorkerIndexGap {
                    expected,
                    found: index,
                });
            }
            rest = &rest[tag_len..];
            let close = tags.worker_close(index);
            let Some(end) = rest.find(&close) else {
                return Err(ParseError::UnbalancedTags(format!(
                    "worker {index} of round {round_index} is never closed by `{close}`"
                )));
            };
            workers.push(Segment::worker(round_index, index, &rest[..end], counter));
            rest = &rest[end + close.len()..];
            expected += 1;
        } else if rest.starts_with(&tags.spawn_close) {
            if workers.is_empty() {
                return Err(ParseError::UnexpectedContent(format!(
                    "round {round_index} closes without any worker block"
                )));
            }
            return Ok((SpawnRound { workers }, &rest[tags.spawn_close.len()..]));
        } else if let Some((index, _)) = tags.match_worker_close(rest) {
            return Err(ParseError::StrayClose(format!(
                "close tag for worker {index} in round {round_index} has no matching open tag"
            )));
        } else if rest.starts_with(&tags.spawn_open) {
            return Err(ParseError::CrossedNesting(format!(
                "spawn block opened inside round {round_index}"
            )));
        } else if rest.is_empty() {
            return Err(ParseError::UnbalancedTags(format!(
                "round {round_index} is never closed by `{}`",
                tags.spawn_close
            )));
        } else {
            return Err(ParseError::UnexpectedContent(format!(
                "literal text between worker blocks of round {round_index}"
            )));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counter::WhitespaceCounter;
    use crate::transcript::{Part, Role};

    const C: WhitespaceCounter = WhitespaceCounter;

    fn parse(text: &str) -> Result<Transcript, ParseError> {
        parse_transcript(text, &TagConfig::default(), &C)
    }

    #[test]
    fn plain_text_is_one_director_segment() {
        let t = parse("abc").unwrap();
        assert_eq!(t.parts.len(), 1);
        match &t.parts[0] {
            Part::Director(s) => {
                assert_eq!(s.text, "abc");
                assert_eq!(s.role, Role::Director);
            }
            Part::Round(_) => panic!("expected director"),
        }
        assert_eq!(t.round_count(), 0);
    }

    #[test]
    fn single_round_layout() {
        let t = parse(
            "S1<spawn_workers><worker_1>w1</worker_1><worker_2>w2</worker_2>\
             <worker_3>w3</worker_3></spawn_workers>S2",
        )
        .unwrap();
        assert_eq!(t.parts.len(), 3);
        let round: Vec<_> = t.rounds().collect();
        assert_eq!(round.len(), 1);
        let texts: Vec<_> = round[0].workers.iter().map(|w| w.text.as_str()).collect();
        assert_eq!(texts, vec!["w1", "w2", "w3"]);
        let directors: Vec<_> = t.directors().map(|d| d.text.as_str()).collect();
        assert_eq!(directors, vec!["S1", "S2"]);
    }

    #[test]
    fn missing_worker_close_is_unbalanced() {
        let err = parse("S1<spawn_workers><worker_1>w1").unwrap_err();
        assert!(matches!(err, ParseError::UnbalancedTags(_)), "{err}");
    }

    #[test]
    fn missing_spawn_close_is_unbalanced() {
        let err = parse("S1<spawn_workers><worker_1>w1</worker_1>").unwrap_err();
        assert!(matches!(err, ParseError::UnbalancedTags(_)), "{err}");
    }

    #[test]
    fn worker_index_gap_detected() {
        let err =
            parse("a<spawn_workers><worker_1>x</worker_1><worker_3>y</worker_3></spawn_workers>b")
                .unwrap_err();
        assert_eq!(
            err,
            ParseError::WorkerIndexGap {
                expected: 2,
                found: 3
            }
        );
    }

    #[test]
    fn round_must_start_at_worker_one() {
        let err = parse("a<spawn_workers><worker_2>x</worker_2></spawn_workers>b").unwrap_err();
        assert_eq!(
            err,
            ParseError::WorkerIndexGap {
                expected: 1,
                found: 2
            }
        );
    }

    #[test]
    fn stray_close_between_workers() {
        let err =
            parse("a<spawn_workers><worker_1>x</worker_1></worker_2></spawn_workers>b").unwrap_err();
        assert!(matches!(err, ParseError::StrayClose(_)), "{err}");
    }

    #[test]
    fn spawn_inside_round_is_crossed_nesting() {
        let err = parse("a<spawn_workers><spawn_workers>").unwrap_err();
        assert!(matches!(err, ParseError::CrossedNesting(_)), "{err}");
    }

    #[test]
    fn empty_round_rejected() {
        let err = parse("a<spawn_workers></spawn_workers>b").unwrap_err();
        assert!(matches!(err, ParseError::UnexpectedContent(_)), "{err}");
    }

    #[test]
    fn literal_text_between_workers_rejected() {
        let err = parse(
            "a<spawn_workers><worker_1>x</worker_1>gap<worker_2>y</worker_2></spawn_workers>b",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::UnexpectedContent(_)), "{err}");
    }

    #[test]
    fn tags_inside_worker_text_are_literal() {
        let t = parse(
            "a<spawn_workers><worker_1>has <spawn_workers> and </worker_2> inside</worker_1>\
             </spawn_workers>b",
        )
        .unwrap();
        let round: Vec<_> = t.rounds().collect();
        assert_eq!(
            round[0].workers[0].text,
            "has <spawn_workers> and </worker_2> inside"
        );
    }

    #[test]
    fn worker_tags_in_director_text_are_literal() {
        let t = parse("director says </worker_1> and </spawn_workers> happily").unwrap();
        assert_eq!(t.round_count(), 0);
    }

    #[test]
    fn empty_worker_segment_is_legal() {
        let t = parse("a<spawn_workers><worker_1></worker_1><worker_2>x</worker_2></spawn_workers>b")
            .unwrap();
        let round: Vec<_> = t.rounds().collect();
        assert_eq!(round[0].workers[0].text, "");
        assert_eq!(round[0].workers[0].length, 0);
    }

    #[test]
    fn empty_director_between_rounds_is_legal() {
        let t = parse(
            "a<spawn_workers><worker_1>x</worker_1></spawn_workers>\
             <spawn_workers><worker_1>y</worker_1></spawn_workers>b",
        )
        .unwrap();
        assert_eq!(t.round_count(), 2);
        let directors: Vec<_> = t.directors().map(|d| d.text.as_str()).collect();
        assert_eq!(directors, vec!["a", "", "b"]);
    }

    #[test]
    fn parse_render_round_trip_single() {
        let tags = TagConfig::default();
        let text = "think <spawn_workers><worker_1>case one</worker_1>\
                    <worker_2>case two</worker_2></spawn_workers> combine";
        let t = parse(text).unwrap();
        assert_eq!(t.render(&tags), text);
        assert_eq!(parse(&t.render(&tags)).unwrap(), t);
    }

    #[test]
    fn segment_lengths_use_counter() {
        let t = parse("one two three<spawn_workers><worker_1>a b</worker_1></spawn_workers>x")
            .unwrap();
        let directors: Vec<_> = t.directors().map(|d| d.length).collect();
        assert_eq!(directors, vec![3, 1]);
        assert_eq!(t.rounds().next().unwrap().workers[0].length, 2);
    }
}
