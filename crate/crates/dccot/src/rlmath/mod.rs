//! Reward shaping, data filtering, advantages, and policy objectives.
//!
//! Everything here is pure arithmetic over already-scored responses and
//! already-computed log-probabilities: no model, no gradients. The objective
//! functions return the scalar objective value; a training framework supplies
//! the differentiation (for the truncated-importance objective the
//! `min(r, eps_high) * advantage` factor is a stop-gradient coefficient).

pub mod presets;

pub use presets::{FilterStrategy, Objective, StagePreset};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reward shaping mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Correctness-format reward 1.0 / 0.5 / 0.0 minus the length penalty,
    /// floored at zero.
    Standard,
    /// High-length-penalty reward: `1 - penalty` for correct-and-formatted
    /// responses, a small constant for correct-but-unformatted ones, zero
    /// otherwise.
    Hlp,
}

/// Length-penalty and reward parameters for one training stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    /// Maximum penalty, reached at `l_max`.
    #[serde(rename = "C_L")]
    pub c_l: f64,
    /// Longest path length at which the penalty starts.
    #[serde(rename = "L_cutoff")]
    pub l_cutoff: usize,
    /// Maximum allowed longest path length.
    #[serde(rename = "L_max")]
    pub l_max: usize,
    pub mode: RewardMode,
}

impl RewardConfig {
    pub fn standard(c_l: f64, l_cutoff: usize, l_max: usize) -> Self {
        Self {
            c_l,
            l_cutoff,
            l_max,
            mode: RewardMode::Standard,
        }
    }

    pub fn hlp(c_l: f64, l_cutoff: usize, l_max: usize) -> Self {
        Self {
            c_l,
            l_cutoff,
            l_max,
            mode: RewardMode::Hlp,
        }
    }

    pub fn validate(&self) -> Result<(), RlError> {
        if self.c_l.is_nan() || self.c_l < 0.0 {
            return Err(RlError::InvalidConfig(format!("c_l must be >= 0, got {}", self.c_l)));
        }
        if self.l_cutoff >= self.l_max {
            return Err(RlError::InvalidConfig(format!(
                "l_cutoff ({}) must be below l_max ({})",
                self.l_cutoff, self.l_max
            )));
        }
        Ok(())
    }
}

/// One scored rollout: correctness, format compliance, and its longest path
/// length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredResponse {
    pub correct: bool,
    pub format_ok: bool,
    pub lpl: usize,
}

/// All rollouts for one problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RolloutGroup {
    pub problem_id: String,
    pub responses: Vec<ScoredResponse>,
}

/// Per-token log-probabilities for one response under the current, rollout
/// (old), and reference policies.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenLogProbs {
    pub current: Vec<f64>,
    pub old: Vec<f64>,
    pub reference: Vec<f64>,
}

impl TokenLogProbs {
    pub fn new(current: Vec<f64>, old: Vec<f64>, reference: Vec<f64>) -> Result<Self, RlError> {
        if current.len() != old.len() || current.len() != reference.len() {
            return Err(RlError::ShapeMismatch(format!(
                "log-prob lengths differ: current {}, old {}, reference {}",
                current.len(),
                old.len(),
                reference.len()
            )));
        }
        Ok(Self {
            current,
            old,
            reference,
        })
    }

    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    /// On-policy log-probs: current = old = reference.
    pub fn on_policy(logps: Vec<f64>) -> Self {
        Self {
            current: logps.clone(),
            old: logps.clone(),
            reference: logps,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RlError {
    #[error("longest path length {lpl} exceeds the maximum {l_max}")]
    OverMax { lpl: usize, l_max: usize },
    #[error("advantages are undefined for a group with constant rewards")]
    DegenerateGroup,
    #[error("advantages need at least 2 responses, got {0}")]
    GroupTooSmall(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("input must be non-empty")]
    Empty,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

/// The overlong penalty: zero up to the cutoff, then linear up to `c_l` at
/// `l_max`. Lengths beyond `l_max` are an error here; the scoring pipeline
/// maps them to reward zero instead (truncated responses).
pub fn length_penalty(lpl: usize, cfg: &RewardConfig) -> Result<f64, RlError> {
    if lpl > cfg.l_max {
        return Err(RlError::OverMax {
            lpl,
            l_max: cfg.l_max,
        });
    }
    if lpl <= cfg.l_cutoff {
        return Ok(0.0);
    }
    Ok(cfg.c_l * (lpl - cfg.l_cutoff) as f64 / (cfg.l_max - cfg.l_cutoff) as f64)
}

/// Standard-stage reward: correctness-format reward (1.0 correct+format,
/// 0.5 correct only, 0.0 otherwise) minus the length penalty, floored at 0.
pub fn reward_standard(r: &ScoredResponse, cfg: &RewardConfig) -> Result<f64, RlError> {
    debug_assert_eq!(cfg.mode, RewardMode::Standard);
    let penalty = length_penalty(r.lpl, cfg)?;
    let base = match (r.correct, r.format_ok) {
        (true, true) => 1.0,
        (true, false) => 0.5,
        (false, _) => 0.0,
    };
    Ok((base - penalty).max(0.0))
}

/// High-length-penalty reward. The penalty applies only to responses that
/// are both correct and formatted, so the ordering
/// `correct+format >= 1 - c_l > 0.01 = correct-only > 0 = incorrect`
/// holds for every length up to `l_max`.
pub fn reward_hlp(r: &ScoredResponse, cfg: &RewardConfig) -> Result<f64, RlError> {
    debug_assert_eq!(cfg.mode, RewardMode::Hlp);
    match (r.correct, r.format_ok) {
        (true, true) => Ok(1.0 - length_penalty(r.lpl, cfg)?),
        (true, false) => Ok(0.01),
        (false, _) => Ok(0.0),
    }
}

/// Reward under the config's mode, treating over-long responses as truncated
/// (reward 0). This is the entry point the scoring pipeline uses; the
/// orchestrator itself can never produce `lpl > l_max`, but imported data can.
pub fn score_response(r: &ScoredResponse, cfg: &RewardConfig) -> f64 {
    let reward = match cfg.mode {
        RewardMode::Standard => reward_standard(r, cfg),
        RewardMode::Hlp => reward_hlp(r, cfg),
    };
    match reward {
        Ok(v) => v,
        Err(RlError::OverMax { .. }) => 0.0,
        Err(_) => 0.0,
    }
}

/// Group-normalized advantages: `(r - mean) / std` with the population
/// standard deviation over the group.
pub fn group_advantages(rewards: &[f64]) -> Result<Vec<f64>, RlError> {
    if rewards.len() < 2 {
        return Err(RlError::GroupTooSmall(rewards.len()));
    }
    // Constant rewards mean σ = 0; test for that exactly rather than through
    // the accumulated variance, which can pick up rounding noise.
    if rewards.windows(2).all(|w| w[0] == w[1]) {
        return Err(RlError::DegenerateGroup);
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 {
        return Err(RlError::DegenerateGroup);
    }
    Ok(rewards.iter().map(|r| (r - mean) / std).collect())
}

/// Keep a problem iff at least one response is both correct and formatted.
/// All-correct groups stay in: they still teach format and length.
pub fn filter_include_easy(group: &RolloutGroup) -> bool {
    group.responses.iter().any(|r| r.correct && r.format_ok)
}

/// Keep a problem iff its correctness flags are mixed; format plays no part.
pub fn filter_remove_easy(group: &RolloutGroup) -> bool {
    let any_correct = group.responses.iter().any(|r| r.correct);
    let any_wrong = group.responses.iter().any(|r| !r.correct);
    any_correct && any_wrong
}

/// Per-token KL estimate against the reference policy:
/// `u - ln(u) - 1` with `u = exp(ref - current)`. Nonnegative, zero iff the
/// policies agree on the token.
pub fn kl_estimate(reference: &[f64], current: &[f64]) -> Result<Vec<f64>, RlError> {
    if reference.len() != current.len() {
        return Err(RlError::ShapeMismatch(format!(
            "reference has {} tokens, current has {}",
            reference.len(),
            current.len()
        )));
    }
    Ok(reference
        .iter()
        .zip(current)
        .map(|(r, c)| {
            let log_u = r - c;
            log_u.exp() - log_u - 1.0
        })
        .collect())
}

fn check_batch(responses: &[TokenLogProbs], advantages: &[f64]) -> Result<usize, RlError> {
    if responses.len() != advantages.len() {
        return Err(RlError::ShapeMismatch(format!(
            "{} responses but {} advantages",
            responses.len(),
            advantages.len()
        )));
    }
    let total: usize = responses.iter().map(TokenLogProbs::len).sum();
    if total == 0 {
        return Err(RlError::Empty);
    }
    Ok(total)
}

/// Clipped-ratio policy objective over a mini-batch, normalized by the total
/// token count: per token,
/// `min(r * adv, clip(r, 1 - eps_low, 1 + eps_high) * adv) - beta * kl`
/// with `r = exp(current - old)`.
pub fn dapo_objective(
    responses: &[TokenLogProbs],
    advantages: &[f64],
    eps_low: f64,
    eps_high: f64,
    beta: f64,
) -> Result<f64, RlError> {
    let total = check_batch(responses, advantages)?;
    let mut sum = 0.0;
    for (lp, &adv) in responses.iter().zip(advantages) {
        for t in 0..lp.len() {
            let ratio = (lp.current[t] - lp.old[t]).exp();
            let clipped = ratio.clamp(1.0 - eps_low, 1.0 + eps_high);
            let term = (ratio * adv).min(clipped * adv);
            let kl = {
                let log_u = lp.reference[t] - lp.current[t];
                log_u.exp() - log_u - 1.0
            };
            sum += term - beta * kl;
        }
    }
    Ok(sum / total as f64)
}

/// Truncated-importance-sampling REINFORCE objective over a mini-batch,
/// normalized by the total token count: per token,
/// `min(r, eps_high) * adv * log_prob_current - beta * kl`. The coefficient
/// `min(r, eps_high) * adv` carries no gradient; fully on-policy with
/// `beta = 0` this is exactly the REINFORCE surrogate.
pub fn cispo_objective(
    responses: &[TokenLogProbs],
    advantages: &[f64],
    eps_high: f64,
    beta: f64,
) -> Result<f64, RlError> {
    let total = check_batch(responses, advantages)?;
    let mut sum = 0.0;
    for (lp, &adv) in responses.iter().zip(advantages) {
        for t in 0..lp.len() {
            let ratio = (lp.current[t] - lp.old[t]).exp();
            let coeff = ratio.min(eps_high) * adv;
            let kl = {
                let log_u = lp.reference[t] - lp.current[t];
                log_u.exp() - log_u - 1.0
            };
            sum += coeff * lp.current[t] - beta * kl;
        }
    }
    Ok(sum / total as f64)
}

/// Summary statistics over per-token entropies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySummary {
    pub mean: f64,
    /// `(percentile, value)` pairs, nearest-rank definition.
    pub percentiles: Vec<(f64, f64)>,
}

/// Mean and nearest-rank percentiles of a set of per-token entropies.
pub fn entropy_stats(values: &[f64], percentiles: &[f64]) -> Result<EntropySummary, RlError> {
    if values.is_empty() {
        return Err(RlError::Empty);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("entropies must not be NaN"));
    let n = sorted.len();
    let out = percentiles
        .iter()
        .map(|&p| {
            let rank = ((p / 100.0 * n as f64).ceil() as usize).clamp(1, n);
            (p, sorted[rank - 1])
        })
        .collect();
    Ok(EntropySummary {
        mean,
        percentiles: out,
    })
}
