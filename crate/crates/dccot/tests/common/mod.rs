//! Shared generators and independent oracles for the integration suites.
#![allow(dead_code)] // each suite uses its own subset

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dccot::counter::WhitespaceCounter;
use dccot::tags::TagConfig;
use dccot::testkit::EpisodePlan;
use dccot::transcript::{Part, Segment, SpawnRound, Terminated, Transcript};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A run of plain alphanumeric words; never collides with tag strings.
pub fn word_text(rng: &mut impl Rng, words: usize) -> String {
    (0..words)
        .map(|_| format!("t{}", rng.gen_range(0..1000)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Random valid transcript: up to `max_rounds` rounds, 1..=`max_workers`
/// workers per round, segments of 0..=8 words.
pub fn random_transcript(
    rng: &mut impl Rng,
    max_rounds: usize,
    max_workers: usize,
) -> Transcript {
    let c = WhitespaceCounter;
    let rounds = rng.gen_range(0..=max_rounds);
    let mut parts = Vec::new();
    parts.push(Part::Director(Segment::director(
        0,
        { let n = rng.gen_range(0..=8); word_text(rng, n) },
        &c,
    )));
    for r in 1..=rounds {
        let k = rng.gen_range(1..=max_workers);
        let workers = (1..=k)
            .map(|i| Segment::worker(r, i, { let n = rng.gen_range(0..=8); word_text(rng, n) }, &c))
            .collect();
        parts.push(Part::Round(SpawnRound { workers }));
        parts.push(Part::Director(Segment::director(
            r,
            { let n = rng.gen_range(0..=8); word_text(rng, n) },
            &c,
        )));
    }
    Transcript {
        prompt: { let n = rng.gen_range(0..=5); word_text(rng, n) },
        parts,
        terminated: if rng.gen_bool(0.8) {
            Terminated::Eos
        } else {
            Terminated::BudgetExhausted
        },
    }
}

/// Independent longest-path oracle: builds the segment DAG explicitly
/// (start → S1 → every worker of round 1 → S2 → ...) and runs a generic
/// topological longest-path relaxation over it, with node weights equal to
/// segment token counts.
pub fn dag_longest_path(t: &Transcript) -> usize {
    // Node 0 is the source with weight 0; edges carry no weight of their own.
    let mut weights: Vec<usize> = vec![0];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut frontier: Vec<usize> = vec![0];

    for part in &t.parts {
        match part {
            Part::Director(seg) => {
                let node = weights.len();
                weights.push(seg.length);
                for &from in &frontier {
                    edges.push((from, node));
                }
                frontier = vec![node];
            }
            Part::Round(round) => {
                let mut next = Vec::new();
                for w in &round.workers {
                    let node = weights.len();
                    weights.push(w.length);
                    for &from in &frontier {
                        edges.push((from, node));
                    }
                    next.push(node);
                }
                frontier = next;
            }
        }
    }

    // Nodes were created in topological order; relax in that order.
    let mut dist = vec![0usize; weights.len()];
    for (i, d) in dist.iter_mut().enumerate() {
        *d = weights[i];
    }
    for &(u, v) in &edges {
        dist[v] = dist[v].max(dist[u] + weights[v]);
    }
    dist.into_iter().max().unwrap_or(0)
}

/// Random episode plan: all rounds share one worker count (the orchestrator
/// fans out a fixed K per round).
pub fn random_plan(rng: &mut impl Rng, rounds: usize, workers: usize) -> EpisodePlan {
    let directors = (0..=rounds)
        .map(|_| { let n = rng.gen_range(1..=6); word_text(rng, n) })
        .collect();
    let round_texts = (0..rounds)
        .map(|_| {
            (0..workers)
                .map(|_| { let n = rng.gen_range(0..=6); word_text(rng, n) })
                .collect()
        })
        .collect();
    EpisodePlan {
        prompt: { let n = rng.gen_range(1..=4); word_text(rng, n) },
        directors,
        rounds: round_texts,
    }
}

/// Removes every scaffold tag string (worker open/close tags up to
/// `max_workers`, and the spawn-close tag) from `text`. The spawn-open tag is
/// policy-emitted and stays.
pub fn strip_scaffold_tags(text: &str, tags: &TagConfig, max_workers: usize) -> String {
    let mut out = text.to_string();
    for i in 1..=max_workers {
        out = out.replace(&tags.worker_open(i), "");
        out = out.replace(&tags.worker_close(i), "");
    }
    out.replace(&tags.spawn_close, "")
}
