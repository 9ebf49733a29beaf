//! Rollout-set evaluation: pass@1, maj@k subset voting, and baseline deltas.
//!
//! Majority voting follows the subset procedure: over every k-subset of a
//! problem's rollouts, partition the final answers into equivalence classes,
//! let the largest class vote (ties split uniformly across tied classes,
//! which for k = 3 reduces to: one class → average all three, a 2+1 split →
//! average the pair, three singletons → average all three), and charge the
//! subset the maximum longest path length of its members. Answer equivalence
//! is a pluggable oracle; transitivity is forced by union-find.

use std::collections::HashMap;
use std::process::Command;
use std::sync::Mutex;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact subset enumeration is used up to this many subsets; beyond it,
/// seeded sampling takes over and results are flagged.
pub const DEFAULT_SUBSET_CAP: u64 = 10_000_000;

/// Seed for the sampling fallback.
pub const DEFAULT_SAMPLE_SEED: u64 = 0xDCC0;

/// One rollout of one problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalResponse {
    pub answer_text: String,
    pub correct: bool,
    pub lpl: usize,
}

/// All rollouts for one problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub problem_id: String,
    pub responses: Vec<EvalResponse>,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("maj@{k} needs at least {k} responses, problem `{problem_id}` has {got}")]
    TooFewResponses {
        problem_id: String,
        k: usize,
        got: usize,
    },
    #[error("equivalence oracle failed: {0}")]
    OracleFailure(String),
    #[error("no records to evaluate")]
    Empty,
}

/// Answer equivalence. Implementations must be reflexive and symmetric;
/// transitivity is imposed on top by union-find. `Sync` because problems are
/// evaluated concurrently.
pub trait EquivalenceOracle: Sync {
    fn equivalent(&self, a: &str, b: &str) -> Result<bool, EvalError>;
}

/// Normalized exact string match: trim, collapse whitespace runs, strip
/// wrapping braces.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMatchOracle;

/// Canonical form used by [`ExactMatchOracle`].
pub fn normalize_answer(answer: &str) -> String {
    let mut s: String = answer.split_whitespace().collect::<Vec<_>>().join(" ");
    loop {
        let stripped = strip_wrapping_braces(&s);
        if stripped == s {
            return s;
        }
        s = stripped;
    }
}

/// Removes one pair of braces when they wrap the whole string.
fn strip_wrapping_braces(s: &str) -> String {
    let t = s.trim();
    if t.len() < 2 || !t.starts_with('{') || !t.ends_with('}') {
        return t.to_string();
    }
    // The opening brace must match the final one.
    let mut depth = 0usize;
    for (i, ch) in t.char_indices() {
        match ch {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 && i != t.len() - 1 {
                    return t.to_string();
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        return t.to_string();
    }
    t[1..t.len() - 1].trim().to_string()
}

impl EquivalenceOracle for ExactMatchOracle {
    fn equivalent(&self, a: &str, b: &str) -> Result<bool, EvalError> {
        Ok(normalize_answer(a) == normalize_answer(b))
    }
}

/// Shells out per answer pair: `program [args...] <a> <b>`, expecting
/// `true`/`false` (or `1`/`0`) on stdout. Verdicts are memoized.
pub struct CommandOracle {
    program: String,
    args: Vec<String>,
    cache: Mutex<HashMap<(String, String), bool>>,
}

impl CommandOracle {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            program: program.into(),
            args,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Splits a shell-style command line into program and arguments.
    pub fn from_command_line(line: &str) -> Option<Self> {
        let mut parts = line.split_whitespace().map(str::to_string);
        let program = parts.next()?;
        Some(Self::new(program, parts.collect()))
    }
}

impl EquivalenceOracle for CommandOracle {
    fn equivalent(&self, a: &str, b: &str) -> Result<bool, EvalError> {
        let key = (a.to_string(), b.to_string());
        if let Some(&hit) = self.cache.lock().expect("oracle cache").get(&key) {
            return Ok(hit);
        }
        let out = Command::new(&self.program)
            .args(&self.args)
            .arg(a)
            .arg(b)
            .output()
            .map_err(|e| EvalError::OracleFailure(format!("{}: {e}", self.program)))?;
        let stdout = String::from_utf8_lossy(&out.stdout);
        let verdict = match stdout.trim().to_ascii_lowercase().as_str() {
            "true" | "1" => true,
            "false" | "0" => false,
            other => {
                return Err(EvalError::OracleFailure(format!(
                    "`{}` printed `{other}` instead of a boolean",
                    self.program
                )))
            }
        };
        self.cache.lock().expect("oracle cache").insert(key, verdict);
        Ok(verdict)
    }
}

/// Partitions answers into equivalence classes, forcing transitivity via
/// union-find over pairwise oracle calls. Returns a class id per answer.
pub fn equivalence_classes(
    answers: &[&str],
    oracle: &dyn EquivalenceOracle,
) -> Result<Vec<usize>, EvalError> {
    let n = answers.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in i + 1..n {
            if find(&mut parent, i) == find(&mut parent, j) {
                continue;
            }
            if oracle.equivalent(answers[i], answers[j])? {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[rj] = ri;
            }
        }
    }
    // Renumber roots densely in first-appearance order.
    let mut ids = HashMap::new();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let root = find(&mut parent, i);
        let next = ids.len();
        out.push(*ids.entry(root).or_insert(next));
    }
    Ok(out)
}

/// Aggregate of one evaluation mode over a set of problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Mean accuracy in [0, 1].
    pub accuracy: f64,
    /// Mean longest path length.
    pub lpl: f64,
}

/// Per-problem voting outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemScore {
    pub problem_id: String,
    pub accuracy: f64,
    pub lpl: f64,
    /// Number of subsets aggregated.
    pub subsets: u64,
    /// True when the subset space was sampled rather than enumerated.
    pub sampled: bool,
}

/// pass@1: per-problem mean correctness averaged over problems, and the mean
/// longest path length over all responses.
pub fn pass_at_1(records: &[EvalRecord]) -> Result<Summary, EvalError> {
    if records.is_empty() || records.iter().any(|r| r.responses.is_empty()) {
        return Err(EvalError::Empty);
    }
    let accuracy = records
        .iter()
        .map(|r| {
            r.responses.iter().filter(|x| x.correct).count() as f64 / r.responses.len() as f64
        })
        .sum::<f64>()
        / records.len() as f64;
    let (lpl_sum, count) = records
        .iter()
        .flat_map(|r| r.responses.iter())
        .fold((0usize, 0usize), |(s, c), x| (s + x.lpl, c + 1));
    Ok(Summary {
        accuracy,
        lpl: lpl_sum as f64 / count as f64,
    })
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Scores one k-subset: the largest answer class votes, with ties split
/// uniformly across the tied classes; the cost is the subset's max lpl.
fn score_subset(record: &EvalRecord, classes: &[usize], subset: &[usize]) -> (f64, f64) {
    let mut sizes: HashMap<usize, (usize, usize)> = HashMap::new(); // class -> (members, correct)
    let mut max_lpl = 0usize;
    for &i in subset {
        let entry = sizes.entry(classes[i]).or_insert((0, 0));
        entry.0 += 1;
        if record.responses[i].correct {
            entry.1 += 1;
        }
        max_lpl = max_lpl.max(record.responses[i].lpl);
    }
    let top = sizes.values().map(|&(m, _)| m).max().expect("non-empty subset");
    let tied: Vec<&(usize, usize)> = sizes.values().filter(|&&(m, _)| m == top).collect();
    let accuracy = tied
        .iter()
        .map(|(members, correct)| *correct as f64 / *members as f64)
        .sum::<f64>()
        / tied.len() as f64;
    (accuracy, max_lpl as f64)
}

/// maj@k for one problem. Exact enumeration of all k-subsets up to
/// `subset_cap`; beyond that, `subset_cap` subsets are sampled with the seed.
pub fn maj_at_k(
    record: &EvalRecord,
    oracle: &dyn EquivalenceOracle,
    k: usize,
    subset_cap: u64,
    seed: u64,
) -> Result<ProblemScore, EvalError> {
    let n = record.responses.len();
    if n < k {
        return Err(EvalError::TooFewResponses {
            problem_id: record.problem_id.clone(),
            k,
            got: n,
        });
    }
    let answers: Vec<&str> = record.responses.iter().map(|r| r.answer_text.as_str()).collect();
    let classes = equivalence_classes(&answers, oracle)?;

    let total = binomial(n as u64, k as u64);
    let mut acc_sum = 0.0;
    let mut lpl_sum = 0.0;
    let mut subsets = 0u64;
    let sampled = total > subset_cap;
    if sampled {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..subset_cap {
            let subset: Vec<usize> = sample(&mut rng, n, k).into_vec();
            let (a, l) = score_subset(record, &classes, &subset);
            acc_sum += a;
            lpl_sum += l;
            subsets += 1;
        }
    } else {
        for subset in (0..n).combinations(k) {
            let (a, l) = score_subset(record, &classes, &subset);
            acc_sum += a;
            lpl_sum += l;
            subsets += 1;
        }
    }
    Ok(ProblemScore {
        problem_id: record.problem_id.clone(),
        accuracy: acc_sum / subsets as f64,
        lpl: lpl_sum / subsets as f64,
        subsets,
        sampled,
    })
}

/// maj@3 with the default enumeration settings.
pub fn maj_at_3(
    record: &EvalRecord,
    oracle: &dyn EquivalenceOracle,
) -> Result<ProblemScore, EvalError> {
    maj_at_k(record, oracle, 3, DEFAULT_SUBSET_CAP, DEFAULT_SAMPLE_SEED)
}

/// maj@k across problems: unweighted problem means. Problems are independent
/// and evaluated on a small worker pool; output order matches input order.
pub fn maj_summary(
    records: &[EvalRecord],
    oracle: &dyn EquivalenceOracle,
    k: usize,
) -> Result<(Summary, Vec<ProblemScore>), EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty);
    }
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(4)
        .min(records.len());
    let chunk_size = records.len().div_ceil(workers);
    let chunk_results: Vec<Result<Vec<ProblemScore>, EvalError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = records
            .chunks(chunk_size)
            .map(|chunk| {
                scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|r| maj_at_k(r, oracle, k, DEFAULT_SUBSET_CAP, DEFAULT_SAMPLE_SEED))
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("eval worker"))
            .collect()
    });
    let mut scores = Vec::with_capacity(records.len());
    for chunk in chunk_results {
        scores.extend(chunk?);
    }
    let n = scores.len() as f64;
    let summary = Summary {
        accuracy: scores.iter().map(|s| s.accuracy).sum::<f64>() / n,
        lpl: scores.iter().map(|s| s.lpl).sum::<f64>() / n,
    };
    Ok((summary, scores))
}

/// An (accuracy %, lpl) operating point, as published in results tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodPoint {
    pub accuracy_pct: f64,
    pub lpl: f64,
}

/// Change of a method against its baseline: accuracy in points, lpl in
/// percent of the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub accuracy_points: f64,
    pub lpl_pct: f64,
}

/// Deltas of `method` relative to `baseline`.
pub fn compare_to_baseline(method: MethodPoint, baseline: MethodPoint) -> Delta {
    Delta {
        accuracy_points: method.accuracy_pct - baseline.accuracy_pct,
        lpl_pct: (method.lpl - baseline.lpl) / baseline.lpl * 100.0,
    }
}

/// One row of the results table.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub label: String,
    pub point: MethodPoint,
    pub delta: Option<Delta>,
}

/// Renders rows as an aligned text table with accuracy/LPL columns and
/// optional delta columns.
pub fn render_table(rows: &[ReportRow]) -> String {
    let label_width = rows
        .iter()
        .map(|r| r.label.len())
        .chain(std::iter::once("Method".len()))
        .max()
        .unwrap_or(6);
    let mut out = format!(
        "{:<label_width$}  {:>8}  {:>8}  {:>8}  {:>9}\n",
        "Method", "Acc (%)", "LPL", "dAcc", "dLPL (%)"
    );
    for row in rows {
        let (da, dl) = match row.delta {
            Some(d) => (
                format!("{:+.2}", d.accuracy_points),
                format!("{:+.1}", d.lpl_pct),
            ),
            None => ("-".to_string(), "-".to_string()),
        };
        out.push_str(&format!(
            "{:<label_width$}  {:>8.2}  {:>8.1}  {:>8}  {:>9}\n",
            row.label, row.point.accuracy_pct, row.point.lpl, da, dl
        ));
    }
    out
}
