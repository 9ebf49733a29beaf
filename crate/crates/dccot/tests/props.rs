//! Property tests over the structural invariants.

mod common;

use proptest::prelude::*;
use std::sync::Arc;

use dccot::backend::{GenerationBackend, PromptMatch, ScriptRule, ScriptedBackend};
use dccot::counter::{TokenCounter, WhitespaceCounter};
use dccot::eval::normalize_answer;
use dccot::rlmath::{
    kl_estimate, reward_hlp, reward_standard, RewardConfig, ScoredResponse,
};
use dccot::tags::TagConfig;
use dccot::transcript::{parse_transcript, Part, Segment, SpawnRound, Terminated, Transcript};

const C: WhitespaceCounter = WhitespaceCounter;

/// Plain word runs that cannot collide with tag strings.
fn text_strategy() -> impl Strategy<Value = String> {
    proptest::collection::vec("[a-z][a-z0-9]{0,5}", 0..8).prop_map(|words| words.join(" "))
}

fn transcript_strategy() -> impl Strategy<Value = Transcript> {
    let round = proptest::collection::vec(text_strategy(), 1..=5);
    (
        text_strategy(),
        proptest::collection::vec((round, text_strategy()), 0..=3),
        any::<bool>(),
    )
        .prop_map(|(first, tail, eos)| {
            let mut parts = vec![Part::Director(Segment::director(0, first, &C))];
            for (r, (workers, director)) in tail.into_iter().enumerate() {
                parts.push(Part::Round(SpawnRound {
                    workers: workers
                        .into_iter()
                        .enumerate()
                        .map(|(i, w)| Segment::worker(r + 1, i + 1, w, &C))
                        .collect(),
                }));
                parts.push(Part::Director(Segment::director(r + 1, director, &C)));
            }
            Transcript {
                prompt: String::new(),
                parts,
                terminated: if eos {
                    Terminated::Eos
                } else {
                    Terminated::BudgetExhausted
                },
            }
        })
}

proptest! {
    #[test]
    fn render_parse_round_trip(t in transcript_strategy()) {
        let tags = TagConfig::default();
        let parsed = parse_transcript(&t.render(&tags), &tags, &C)
            .unwrap()
            .with_terminated(t.terminated);
        prop_assert_eq!(parsed, t);
    }

    #[test]
    fn lpl_bounded_by_total(t in transcript_strategy()) {
        prop_assert!(t.longest_path_length() <= t.total_tokens());
        // Equality iff in every round all workers except the longest are empty.
        let slack_free = t.rounds().all(|r| {
            r.total_worker_len() == r.max_worker_len()
        });
        prop_assert_eq!(
            t.longest_path_length() == t.total_tokens(),
            slack_free
        );
    }

    #[test]
    fn dp_between_one_and_max_workers(t in transcript_strategy()) {
        if let Ok(dp) = t.degree_of_parallelism() {
            let k = t.rounds().map(|r| r.workers.len()).max().unwrap_or(1) as f64;
            prop_assert!(dp >= 1.0 - 1e-12);
            prop_assert!(dp <= k + 1e-12);
        }
    }

    #[test]
    fn rewards_monotone_in_lpl(
        lo in 0usize..7000,
        delta in 0usize..500,
        correct in any::<bool>(),
        format_ok in any::<bool>(),
    ) {
        let hi = lo + delta;
        let std_cfg = RewardConfig::standard(0.1, 2000, 7500);
        let hlp_cfg = RewardConfig::hlp(0.9, 2000, 7500);
        let shorter = ScoredResponse { correct, format_ok, lpl: lo };
        let longer = ScoredResponse { correct, format_ok, lpl: hi };
        prop_assert!(
            reward_standard(&shorter, &std_cfg).unwrap()
                >= reward_standard(&longer, &std_cfg).unwrap() - 1e-12
        );
        prop_assert!(
            reward_hlp(&shorter, &hlp_cfg).unwrap()
                >= reward_hlp(&longer, &hlp_cfg).unwrap() - 1e-12
        );
    }

    #[test]
    fn kl_estimate_nonnegative(log_ratios in proptest::collection::vec(-5.0f64..5.0, 1..32)) {
        let current = vec![0.0; log_ratios.len()];
        let values = kl_estimate(&log_ratios, &current).unwrap();
        for (log_u, v) in log_ratios.iter().zip(&values) {
            prop_assert!(*v >= 0.0);
            if log_u.abs() > 1e-9 {
                prop_assert!(*v > 0.0);
            }
        }
    }

    #[test]
    fn answer_normalization_is_idempotent(answer in ".{0,40}") {
        let once = normalize_answer(&answer);
        prop_assert_eq!(normalize_answer(&once), once.clone());
    }

    #[test]
    fn scripted_generation_honors_the_limit(
        words in proptest::collection::vec("[a-z]{1,6}", 0..30),
        limit in 1usize..40,
    ) {
        let continuation = words.join(" ");
        let backend = ScriptedBackend::new(
            vec![ScriptRule {
                matcher: PromptMatch::Exact("P".into()),
                continuation: continuation.clone(),
                emits_eos: true,
            }],
            &TagConfig::default(),
            Arc::new(C),
        );
        let result = backend.generate("P", &["<stop>".to_string()], limit).unwrap();
        prop_assert!(result.token_count <= limit);
        prop_assert_eq!(result.token_count, C.count(&result.text));
        prop_assert!(continuation.starts_with(&result.text));
    }
}
